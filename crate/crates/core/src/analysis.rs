//! Thresholds and fluid limits for the first phase of Karp-Sipser on the
//! random allocation graph.
//!
//! Everything here is a pure function of `(alpha, d)` (and `n, m` when a
//! result is scaled to counts). Roots are found by bracketing bisection,
//! which is slow but cannot wander off the bracket; residuals end up at the
//! level of `f64` rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used to decide whether a load sits at or below the phase-one
/// threshold.
pub const REGIME_TOLERANCE: f64 = 1e-9;

/// Grid points scanned when bracketing the roots of the core equation.
pub const CORE_ROOT_GRID: usize = 10_000;

/// `e^z - z - 1`, the normaliser of a Poisson law conditioned on `>= 2`.
///
/// Summed as a Taylor series for `|z| < 1`, where `expm1(z) - z` loses
/// digits to cancellation.
pub fn poisson_tail2(z: f64) -> f64 {
    if z.abs() < 1.0 {
        let mut term = 0.5 * z * z;
        let mut sum = term;
        let mut k = 2.0;
        while term.abs() > sum.abs() * 1e-18 {
            k += 1.0;
            term *= z / k;
            sum += term;
        }
        sum
    } else {
        z.exp_m1() - z
    }
}

/// Mean of Poisson(`u`) conditioned on a value of at least two:
/// `u (e^u - 1) / f(u)`. Tends to 2 as `u -> 0`.
pub fn truncated_poisson_mean(u: f64) -> f64 {
    if u == 0.0 {
        return 2.0;
    }
    u * u.exp_m1() / poisson_tail2(u)
}

/// Variance of Poisson(`u`) conditioned on a value of at least two.
pub fn truncated_poisson_variance(u: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    let mean = truncated_poisson_mean(u);
    // E[Y(Y-1)] = u^2 e^u / f(u)
    let factorial2 = u * u * u.exp() / poisson_tail2(u);
    factorial2 + mean - mean * mean
}

/// Inverse of [`truncated_poisson_mean`]: the parameter `u >= 0` whose
/// conditioned Poisson law has mean `gamma`. Returns 0 at `gamma = 2`.
pub fn truncated_poisson_param(gamma: f64) -> Result<f64> {
    if !(gamma >= 2.0) || !gamma.is_finite() {
        return Err(Error::Domain {
            function: "truncated_poisson_param",
            value: gamma,
            expected: "gamma >= 2",
        });
    }
    if gamma == 2.0 {
        return Ok(0.0);
    }
    // mean(u) > u for u > 0, so gamma is an upper bracket.
    Ok(bisect(|u| truncated_poisson_mean(u) - gamma, 0.0, gamma))
}

/// `g(x) = (e^u - 1)^x f(u)^(1 - x)` with `u` the conditioned-Poisson
/// parameter of mean `x`. Equals 2 at `x = 2`.
pub fn degree_profile(x: f64) -> Result<f64> {
    Ok(log_degree_profile(x)?.exp())
}

/// `ln g(x)`, see [`degree_profile`].
pub fn log_degree_profile(x: f64) -> Result<f64> {
    if !(x >= 2.0) {
        return Err(Error::Domain {
            function: "degree_profile",
            value: x,
            expected: "x >= 2",
        });
    }
    let u = truncated_poisson_param(x)?;
    if u == 0.0 {
        return Ok(std::f64::consts::LN_2);
    }
    Ok(x * u.exp_m1().ln() + (1.0 - x) * poisson_tail2(u).ln())
}

/// `H(u) = ln f(u) - u - 2 ln u`, convex on `u > 0`.
pub fn tail_log_excess(u: f64) -> Result<f64> {
    if !(u > 0.0) {
        return Err(Error::Domain {
            function: "tail_log_excess",
            value: u,
            expected: "u > 0",
        });
    }
    Ok(poisson_tail2(u).ln() - u - 2.0 * u.ln())
}

fn require_supported_degree(d: usize) -> Result<()> {
    if d < 3 {
        return Err(Error::InvalidParams(format!("d must be at least 3, got {d}")));
    }
    Ok(())
}

/// Positive root of `(d - 1) z = e^z - 1`.
pub fn phase1_root(d: usize) -> Result<f64> {
    require_supported_degree(d)?;
    let slope = (d - 1) as f64;
    let h = |z: f64| z.exp_m1() - slope * z;
    let hi = 4.0 * (d as f64).ln() + 4.0;
    let mut z = bisect(h, 1e-9, hi);
    // Newton polish; keep the step only when it helps.
    for _ in 0..3 {
        let step = h(z) / (z.exp() - slope);
        let next = z - step;
        if h(next).abs() < h(z).abs() {
            z = next;
        } else {
            break;
        }
    }
    Ok(z)
}

/// Largest load `n / m` at which phase one alone matches every left vertex:
/// `z1 / (d (1 - e^{-z1})^{d-1})`.
pub fn phase1_threshold(d: usize) -> Result<f64> {
    let z1 = phase1_root(d)?;
    Ok(threshold_from_root(z1, d))
}

fn threshold_from_root(z1: f64, d: usize) -> f64 {
    z1 / (d as f64 * (-(-z1).exp_m1()).powi(d as i32 - 1))
}

/// `(z / (alpha d))^{1/(d-1)} + e^{-z} - 1`.
pub fn core_equation(z: f64, alpha: f64, d: usize) -> f64 {
    (z / (alpha * d as f64)).powf(1.0 / (d as f64 - 1.0)) + (-z).exp_m1()
}

/// Largest non-negative root of [`core_equation`]; zero when the only
/// non-negative root is `z = 0`.
///
/// The function is positive just above zero and at `z = alpha d`, and has
/// at most two positive roots, so the largest root is the last
/// negative-to-positive crossing on a grid over `(0, alpha d]`. If the grid
/// misses a shallow dip the minimum is refined by golden-section search
/// before concluding that there is no positive root.
pub fn core_root(alpha: f64, d: usize) -> Result<f64> {
    require_supported_degree(d)?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParams(format!("alpha must be positive, got {alpha}")));
    }
    let top = alpha * d as f64;
    let phi = |z: f64| core_equation(z, alpha, d);
    let grid = |i: usize| top * i as f64 / CORE_ROOT_GRID as f64;

    let mut argmin = CORE_ROOT_GRID;
    let mut min = phi(top);
    for i in (1..CORE_ROOT_GRID).rev() {
        let z = grid(i);
        let value = phi(z);
        if value <= 0.0 {
            return Ok(bisect(phi, z, grid(i + 1)));
        }
        if value < min {
            min = value;
            argmin = i;
        }
    }

    let lo = grid(argmin.saturating_sub(1).max(1));
    let hi = grid((argmin + 1).min(CORE_ROOT_GRID));
    let z_min = golden_section_min(phi, lo, hi);
    if phi(z_min) < 0.0 {
        return Ok(bisect(phi, z_min, hi));
    }
    Ok(0.0)
}

/// Which side of the phase-one threshold a load falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Phase one matches all of the left side.
    PhaseOneComplete,
    /// Phase one stops early and leaves a core.
    CoreRemains,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub d: usize,
    pub alpha: f64,
    pub z1: f64,
    pub alpha1: f64,
    pub regime: Regime,
    pub z_star: f64,
    /// Predicted phase-one steps over `n`.
    pub tau1_fraction: f64,
    /// Predicted maximum matching of the core over `m`.
    pub mu_gamma1_fraction_of_m: f64,
    /// Predicted maximum matching of the whole graph over `n`.
    pub mu_fraction_of_n: f64,
}

/// Predicted phase-one length and matching sizes for load `alpha`.
///
/// At or below the threshold everything is matched in phase one. Above it
/// the core has `n - tau1` left vertices and `(1 - (1 + z*) e^{-z*}) m`
/// non-isolated right vertices, and its maximum matching is the smaller of
/// the two.
pub fn predict(alpha: f64, d: usize, n: usize, m: usize) -> Result<ThresholdReport> {
    require_supported_degree(d)?;
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParams(format!("alpha must be non-negative, got {alpha}")));
    }
    if m == 0 {
        return Err(Error::InvalidParams("m must be at least 1".into()));
    }
    let z1 = phase1_root(d)?;
    let alpha1 = threshold_from_root(z1, d);
    if alpha <= alpha1 + REGIME_TOLERANCE {
        return Ok(ThresholdReport {
            d,
            alpha,
            z1,
            alpha1,
            regime: Regime::PhaseOneComplete,
            z_star: 0.0,
            tau1_fraction: 1.0,
            mu_gamma1_fraction_of_m: 0.0,
            mu_fraction_of_n: 1.0,
        });
    }
    let z_star = core_root(alpha, d)?;
    let ad = alpha * d as f64;
    let exponent = d as f64 / (d as f64 - 1.0);
    let tau1_fraction = (1.0 - (z_star / ad).powf(exponent)).clamp(0.0, 1.0);
    let (n, m) = (n as f64, m as f64);
    let left_core = (1.0 - tau1_fraction) * n / m;
    let right_core = -z_star - (1.0 + z_star) * (-z_star).exp_m1();
    let mu_gamma1_fraction_of_m = left_core.min(right_core);
    let mu_fraction_of_n = if n > 0.0 {
        (tau1_fraction + mu_gamma1_fraction_of_m * m / n).min(1.0)
    } else {
        1.0
    };
    Ok(ThresholdReport {
        d,
        alpha,
        z1,
        alpha1,
        regime: Regime::CoreRemains,
        z_star,
        tau1_fraction,
        mu_gamma1_fraction_of_m,
        mu_fraction_of_n,
    })
}

/// One point of the deterministic phase-one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub zeta: f64,
    pub w: f64,
    pub y1: f64,
    pub y: f64,
}

/// Closed-form fluid limit of `(w, v1, v)` during phase one, parametrised
/// by `zeta`, which falls from `alpha d` at `t = 0` to 0 at `t = n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidLimit {
    pub alpha: f64,
    pub d: usize,
    pub n: f64,
    pub m: f64,
}

impl FluidLimit {
    pub fn new(alpha: f64, d: usize, n: usize, m: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParams(format!("d must be at least 2, got {d}")));
        }
        if !(alpha > 0.0) || !alpha.is_finite() || m == 0 {
            return Err(Error::InvalidParams("fluid limit needs alpha > 0 and m >= 1".into()));
        }
        Ok(Self {
            alpha,
            d,
            n: n as f64,
            m: m as f64,
        })
    }

    /// Fluid limit with `alpha = n / m` exactly.
    pub fn from_params(params: &crate::ModelParams) -> Result<Self> {
        Self::new(params.alpha(), params.d, params.n, params.m)
    }

    fn scale(&self) -> f64 {
        self.alpha * self.d as f64
    }

    /// The point at parameter `zeta`, `0 < zeta <= alpha d`.
    pub fn at_zeta(&self, zeta: f64) -> Result<TrajectoryPoint> {
        if !(zeta > 0.0 && zeta <= self.scale()) {
            return Err(Error::Domain {
                function: "trajectory",
                value: zeta,
                expected: "0 < zeta <= alpha d",
            });
        }
        Ok(self.point(zeta))
    }

    fn point(&self, zeta: f64) -> TrajectoryPoint {
        let d = self.d as f64;
        let ratio = zeta / self.scale();
        let root = ratio.powf(1.0 / (d - 1.0));
        let left = ratio * root;
        TrajectoryPoint {
            t: self.n * (1.0 - left),
            zeta,
            w: left * self.n,
            y1: self.m * zeta * (root + (-zeta).exp_m1()),
            y: (-zeta).exp() * poisson_tail2(zeta) * self.m,
        }
    }

    /// The point after `t` phase-one steps, `0 <= t <= n`.
    pub fn at_step(&self, t: f64) -> TrajectoryPoint {
        let frac = if self.n > 0.0 { (1.0 - t / self.n).clamp(0.0, 1.0) } else { 0.0 };
        let d = self.d as f64;
        let zeta = self.scale() * frac.powf((d - 1.0) / d);
        if zeta == 0.0 {
            return TrajectoryPoint {
                t,
                zeta,
                w: 0.0,
                y1: 0.0,
                y: 0.0,
            };
        }
        let mut p = self.point(zeta);
        p.t = t;
        p
    }

    /// Relative error of `(d w - y1) / y` against the conditioned-Poisson
    /// mean at `zeta`. Zero up to rounding when `alpha = n / m`.
    pub fn identity_residual(&self, p: &TrajectoryPoint) -> f64 {
        let lhs = (self.d as f64 * p.w - p.y1) / p.y;
        let rhs = truncated_poisson_mean(p.zeta);
        ((lhs - rhs) / rhs).abs()
    }
}

/// Trajectory points at each `zeta` of the grid, ordered by increasing `t`.
pub fn trajectory(
    alpha: f64,
    d: usize,
    n: usize,
    m: usize,
    zeta_grid: &[f64],
) -> Result<Vec<TrajectoryPoint>> {
    let fluid = FluidLimit::new(alpha, d, n, m)?;
    let mut points = zeta_grid
        .iter()
        .map(|&z| fluid.at_zeta(z))
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(points)
}

/// `points` values of `zeta` evenly spaced on `(0, alpha d]`, largest first.
pub fn zeta_grid(alpha: f64, d: usize, points: usize) -> Vec<f64> {
    let top = alpha * d as f64;
    (0..points)
        .map(|i| top * (points - i) as f64 / points as f64)
        .collect()
}

/// Outcome of one analytic property check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    /// The worst value seen, in the units of the check's bound.
    pub worst: f64,
    pub bound: f64,
}

fn steps(start: f64, end: f64, step: f64) -> impl Iterator<Item = f64> {
    let count = ((end - start) / step).round() as usize;
    (0..=count).map(move |i| start + i as f64 * step)
}

/// Largest second difference of `f` on the grid.
fn max_second_difference(f: impl Fn(f64) -> f64, start: f64, end: f64, step: f64) -> f64 {
    let xs: Vec<f64> = steps(start, end, step).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    ys.windows(3)
        .map(|w| w[0] - 2.0 * w[1] + w[2])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// The analytic properties the model's proofs lean on, checked on fixed
/// grids: log-concavity of `g`, concavity of the conditioned-Poisson
/// parameter, convexity of `H`, the 3/4 bound, the linear lower bound, the
/// trajectory identity, and solver residuals.
pub fn property_checks() -> Vec<PropertyCheck> {
    let mut checks = Vec::new();
    let zeta = |x: f64| truncated_poisson_param(x).expect("grid inside domain");

    let worst = max_second_difference(
        |x| log_degree_profile(x).expect("grid inside domain"),
        2.01,
        8.0,
        0.01,
    );
    checks.push(PropertyCheck {
        name: "log g concave on [2.01, 8]".into(),
        passed: worst <= 1e-9,
        worst,
        bound: 1e-9,
    });

    let worst = max_second_difference(zeta, 2.01, 8.0, 0.01);
    checks.push(PropertyCheck {
        name: "zeta concave on [2.01, 8]".into(),
        passed: worst <= 1e-9,
        worst,
        bound: 1e-9,
    });

    let worst = -max_second_difference(
        |u| -tail_log_excess(u).expect("grid inside domain"),
        0.1,
        10.0,
        0.05,
    );
    checks.push(PropertyCheck {
        name: "H convex on [0.1, 10]".into(),
        passed: worst > 0.0,
        worst,
        bound: 0.0,
    });

    let worst = steps(2.01, 10.0, 0.01)
        .map(|y| {
            let z = zeta(y);
            poisson_tail2(z) / z.powf(y)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(PropertyCheck {
        name: "f(zeta(y)) / zeta(y)^y <= 3/4 on [2.01, 10]".into(),
        passed: worst <= 0.75,
        worst,
        bound: 0.75,
    });

    let worst = steps(2.01, 10.0, 0.01)
        .map(|x| (x - 2.0) - zeta(x))
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(PropertyCheck {
        name: "zeta(x) >= x - 2 on [2.01, 10]".into(),
        passed: worst <= 0.0,
        worst,
        bound: 0.0,
    });

    let fluid = FluidLimit::new(0.9, 3, 90_000, 100_000).expect("valid");
    let worst = zeta_grid(0.9, 3, 100)
        .into_iter()
        .map(|z| fluid.identity_residual(&fluid.at_zeta(z).expect("on grid")))
        .fold(0.0, f64::max);
    checks.push(PropertyCheck {
        name: "trajectory identity on 100 points".into(),
        passed: worst <= 1e-9,
        worst,
        bound: 1e-9,
    });

    let worst = (3..=10)
        .map(|d| {
            let z = phase1_root(d).expect("d >= 3");
            (z * (d - 1) as f64 - z.exp_m1()).abs()
        })
        .fold(0.0, f64::max);
    checks.push(PropertyCheck {
        name: "z1 residual for d in 3..=10".into(),
        passed: worst <= 1e-12,
        worst,
        bound: 1e-12,
    });

    let mut worst: f64 = 0.0;
    let mut passed = true;
    for d in 3..=5 {
        let alpha1 = phase1_threshold(d).expect("d >= 3");
        let above = core_root(alpha1 * (1.0 + 1e-3), d).expect("valid");
        let below = core_root(alpha1 * (1.0 - 1e-3), d).expect("valid");
        passed &= above > 1e-6 && below <= 1e-9;
        worst = worst.max(below);
    }
    checks.push(PropertyCheck {
        name: "z* positive just above alpha1, zero just below (d = 3, 4, 5)".into(),
        passed,
        worst,
        bound: 1e-9,
    });

    checks
}

/// Bisection on a sign-changing bracket, run until the midpoint stops
/// moving.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    for _ in 0..200 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - ratio * (b - a);
        d = a + ratio * (b - a);
    }
    0.5 * (a + b)
}
