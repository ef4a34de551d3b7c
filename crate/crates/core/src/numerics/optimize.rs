/// Location and value of a maximum found by a 1-D search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
///
/// Assumes `f` is unimodal on the interval; stops once the bracket is
/// narrower than `tol`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Maximum {
    assert!(lo < hi, "golden_section_max needs lo < hi");
    assert!(tol > 0.0, "golden_section_max needs tol > 0");
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    // the bracket endpoints are only evaluated when the max sits on the boundary
    let mut best = Maximum { x, value: fx };
    for (xc, fxc) in [(c, fc), (d, fd)] {
        if fxc > best.value {
            best = Maximum { x: xc, value: fxc };
        }
    }
    best
}
