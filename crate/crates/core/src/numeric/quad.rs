//! Globally adaptive Gauss-Kronrod quadrature (15-point Kronrod, 7-point
//! Gauss error estimate). The worklist always splits the interval with the
//! largest error estimate, so effort concentrates on singular corners and
//! oscillatory stretches; the schedule is deterministic for a given
//! integrand and tolerance.

use super::sum::neumaier_sum;

// QK15 nodes and weights on [-1, 1] (QUADPACK dqk15 constants).
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

/// One GK15 panel: returns `(kronrod_value, |kronrod - gauss|)`.
fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);

    let fc = f(mid);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;

    for j in 0..7 {
        let dx = half * XGK[j];
        let fsum = f(mid - dx) + f(mid + dx);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

/// Integrates `f` over the consecutive segments given by `breaks`
/// (strictly increasing, at least two entries), to absolute accuracy
/// `abs_tol`. Seeding with breakpoints lets callers pre-split known
/// oscillation or decay scales.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], abs_tol: f64) -> f64 {
    debug_assert!(breaks.len() >= 2);
    const MAX_PANELS: usize = 200_000;

    let mut panels: Vec<Panel> = breaks
        .windows(2)
        .map(|w| {
            let (value, err) = qk15(f, w[0], w[1]);
            Panel { a: w[0], b: w[1], value, err }
        })
        .collect();

    loop {
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        if total_err <= abs_tol || panels.len() >= MAX_PANELS {
            break;
        }
        // Split the worst panel (first of equals, for determinism).
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            if p.err > panels[worst].err {
                worst = i;
            }
        }
        let Panel { a, b, .. } = panels[worst];
        let mid = 0.5 * (a + b);
        if !(a < mid && mid < b) {
            // Width exhausted at this float resolution; stop refining here.
            panels[worst].err = 0.0;
            continue;
        }
        let (lv, le) = qk15(f, a, mid);
        let (rv, re) = qk15(f, mid, b);
        panels[worst] = Panel { a, b: mid, value: lv, err: le };
        panels.push(Panel { a: mid, b, value: rv, err: re });
    }

    let values: Vec<f64> = panels.iter().map(|p| p.value).collect();
    neumaier_sum(&values)
}

/// Integrates `f` on `[a, b]` to absolute accuracy `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> f64 {
    integrate_with_breaks(f, &[a, b], abs_tol)
}
