//! Adaptive Gauss-Kronrod quadrature.
//!
//! 15-point Kronrod rule with embedded 7-point Gauss estimate, bisected
//! adaptively on the worst interval. Semi-infinite tails are handled by the
//! rational map ω = edge ± u/(1−u), which turns the 1/ω² and faster decay of
//! every integrand in this crate into a bounded smooth function on [0, 1).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Integral estimate with an error bound and the evaluation count.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

// Gauss-Kronrod 15-point nodes and weights (QUADPACK).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// One GK15 panel: returns (kronrod value, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut fv = [0.0f64; 15];
    fv[7] = f_center;
    let mut res_gauss = f_center * WG[3];
    let mut res_kronrod = f_center * WGK[7];
    let mut res_abs = f_center.abs() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = f1;
        fv[14 - j] = f2;
        res_kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            // odd-index Kronrod nodes are the embedded Gauss nodes
            res_gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_kronrod * 0.5;
    let mut res_asc = 0.0;
    for (j, &v) in fv.iter().enumerate() {
        let w = WGK[if j < 8 { j } else { 14 - j }];
        res_asc += w * (v - mean).abs();
    }
    let value = res_kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    // QUADPACK error rescaling
    let mut err = ((res_kronrod - res_gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

#[derive(Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptively integrate `f` over the finite interval `[a, b]`.
///
/// Subdivides until the summed error estimate satisfies
/// `err <= max(abs_tol, rel_tol * |value|)` or errors out at
/// `max_panels` subdivisions.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParam("integration bounds must be finite".into()));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    let mut evals = 15usize;
    let (v, e) = gk15(&f, a, b);
    heap.push(Panel {
        a,
        b,
        value: v,
        error: e,
    });
    let mut total_v = v;
    let mut total_e = e;
    while total_e > abs_tol.max(rel_tol * total_v.abs()) {
        if heap.len() >= max_panels {
            return Err(Error::Quadrature(format!(
                "error {total_e:.3e} above tolerance after {} panels (value {total_v:.6e})",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap cannot be empty during refinement");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // interval at f64 resolution; give up on splitting it further
            total_v = worst.value + heap.iter().map(|p| p.value).sum::<f64>();
            total_e = worst.error + heap.iter().map(|p| p.error).sum::<f64>();
            heap.push(worst);
            if total_e > abs_tol.max(rel_tol * total_v.abs()) {
                return Err(Error::Quadrature(format!(
                    "interval exhausted at f64 resolution with error {total_e:.3e}"
                )));
            }
            break;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        evals += 30;
        total_v += v1 + v2 - worst.value;
        total_e += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        // resum occasionally to control error-accumulator drift
        if heap.len() % 256 == 0 {
            total_v = heap.iter().map(|p| p.value).sum();
            total_e = heap.iter().map(|p| p.error).sum();
        }
    }
    Ok(QuadResult {
        value: total_v,
        abs_error: total_e,
        evaluations: evals,
    })
}

/// Integrate `f` over the whole real line: adaptively over the core window
/// `[lo, hi]` plus both semi-infinite tails via the map ω = edge ± u/(1−u).
///
/// Requires the integrand to decay at least as 1/ω² so the mapped tail
/// integrand stays bounded.
pub fn integrate_with_tails<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult> {
    const MAX_PANELS: usize = 20_000;
    if lo >= hi || lo.is_nan() || hi.is_nan() {
        return Err(Error::InvalidParam(format!(
            "tail-integration window is empty: [{lo}, {hi}]"
        )));
    }
    // Split tolerances: the core window carries essentially all the mass.
    let core = integrate(&f, lo, hi, rel_tol * 0.5, abs_tol * 0.5, MAX_PANELS)?;
    let scale = core.value.abs().max(abs_tol);
    let tail_tol = (rel_tol * 0.25 * scale).max(abs_tol * 0.25);
    let right = integrate(
        |u| {
            let w = hi + u / (1.0 - u);
            f(w) / ((1.0 - u) * (1.0 - u))
        },
        0.0,
        1.0,
        rel_tol * 0.25,
        tail_tol,
        MAX_PANELS,
    )?;
    let left = integrate(
        |u| {
            let w = lo - u / (1.0 - u);
            f(w) / ((1.0 - u) * (1.0 - u))
        },
        0.0,
        1.0,
        rel_tol * 0.25,
        tail_tol,
        MAX_PANELS,
    )?;
    Ok(QuadResult {
        value: core.value + right.value + left.value,
        abs_error: core.abs_error + right.abs_error + left.abs_error,
        evaluations: core.evaluations + right.evaluations + left.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-12, 1e-14, 100).unwrap();
        assert_relative_eq!(r.value, 8.0, max_relative = 1e-14);
    }

    #[test]
    fn gaussian_integral() {
        let r = integrate(|x| (-x * x).exp(), -8.0, 8.0, 1e-12, 1e-14, 10_000).unwrap();
        assert_relative_eq!(r.value, std::f64::consts::PI.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn lorentzian_with_tails() {
        // integral of gamma/pi / ((x-c)^2 + gamma^2) over R is 1
        let gamma = 0.37;
        let c = 12.0;
        let f = move |x: f64| gamma / std::f64::consts::PI / ((x - c).powi(2) + gamma * gamma);
        let r = integrate_with_tails(f, c - 50.0 * gamma, c + 50.0 * gamma, 1e-10, 1e-14).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-10);
        assert!(r.abs_error < 1e-8);
    }

    #[test]
    fn needle_near_edge() {
        // narrow feature near the window edge must still converge
        let f = |x: f64| 1.0 / ((x - 0.999).powi(2) + 1e-6);
        let exact = ((1.0 - 0.999f64) / 1e-3).atan() / 1e-3 - ((-1.0 - 0.999f64) / 1e-3).atan() / 1e-3;
        let r = integrate(f, -1.0, 1.0, 1e-10, 1e-12, 10_000).unwrap();
        assert_relative_eq!(r.value, exact, max_relative = 1e-9);
    }

    #[test]
    fn panel_budget_exhaustion_errors() {
        let err = integrate(|x: f64| (1e6 * x).sin(), 0.0, 1.0, 1e-14, 1e-16, 4).unwrap_err();
        assert!(matches!(err, Error::Quadrature(_)));
    }
}
