//! Two-vehicle linear difference system in Richardson arms-race form.
//!
//! `v1` is the position of vehicle 1 relative to vehicle 2 and `v2` the
//! reverse. One step is the affine map
//!
//! ```text
//! v1' = (1 + alpha1) v1 + delta1 v2 + g1 h1
//! v2' = delta2 v1 + (1 + alpha2) v2 + g2 h2
//! ```
//!
//! The per-step change of either coordinate is the "mentalizing" quantity an
//! agent observes; the pure copying term `delta * dv` is the "mirroring" one.
//! The agent simulation uses the algorithmic form (copy the nearest
//! neighbour outright, the `delta = 1` limit); this module is the analytic
//! model and is not coupled to the engine.

use serde::{Deserialize, Serialize};

/// Pivot magnitude below which `I - M` is treated as singular.
pub const SINGULAR_TOL: f64 = 1e-12;
/// Band around unit spectral radius reported as marginal.
pub const MARGINAL_TOL: f64 = 1e-9;

/// Coefficients of the coupled system. Signs are unconstrained.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RichardsonParams {
    /// Position coefficients (coupling to the other vehicle).
    pub delta1: f64,
    pub delta2: f64,
    /// Road-capacity terms; the self-coupling is `1 + alpha`.
    pub alpha1: f64,
    pub alpha2: f64,
    /// Fear intensity.
    pub g1: f64,
    pub g2: f64,
    /// Goal / safety term.
    pub h1: f64,
    pub h2: f64,
}

impl RichardsonParams {
    /// Default demo profile: `delta = 0.25`, `alpha = -0.5`, no forcing.
    pub fn damped_coupled() -> Self {
        RichardsonParams {
            delta1: 0.25,
            delta2: 0.25,
            alpha1: -0.5,
            alpha2: -0.5,
            g1: 0.0,
            g2: 0.0,
            h1: 0.0,
            h2: 0.0,
        }
    }

    /// Coefficients that make the map the identity.
    pub fn identity() -> Self {
        RichardsonParams::default()
    }

    pub fn beta1(&self) -> f64 {
        1.0 + self.alpha1
    }

    pub fn beta2(&self) -> f64 {
        1.0 + self.alpha2
    }

    /// Update matrix `[[beta1, delta1], [delta2, beta2]]`, row-major.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.beta1(), self.delta1], [self.delta2, self.beta2()]]
    }

    /// Constant forcing `(g1 h1, g2 h2)`.
    pub fn forcing(&self) -> (f64, f64) {
        (self.g1 * self.h1, self.g2 * self.h2)
    }

    pub fn is_finite(&self) -> bool {
        [
            self.delta1,
            self.delta2,
            self.alpha1,
            self.alpha2,
            self.g1,
            self.g2,
            self.h1,
            self.h2,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PairState {
    pub v1: f64,
    pub v2: f64,
}

impl PairState {
    pub const fn new(v1: f64, v2: f64) -> Self {
        Self { v1, v2 }
    }
}

/// Change of a relative position between consecutive steps.
pub fn delta(v_now: f64, v_prev: f64) -> f64 {
    v_now - v_prev
}

/// Mirroring response: `delta1` times the other vehicle's previous change.
pub fn mirror_delta(params: &RichardsonParams, dv2_prev: f64) -> f64 {
    params.delta1 * dv2_prev
}

pub fn step(state: PairState, params: &RichardsonParams) -> PairState {
    let (c1, c2) = params.forcing();
    PairState {
        v1: params.beta1() * state.v1 + params.delta1 * state.v2 + c1,
        v2: params.delta2 * state.v1 + params.beta2() * state.v2 + c2,
    }
}

/// Trajectory of `n` steps; element 0 is `initial`, length `n + 1`.
pub fn simulate(initial: PairState, params: &RichardsonParams, n: usize) -> Vec<PairState> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(initial);
    let mut s = initial;
    for _ in 0..n {
        s = step(s, params);
        out.push(s);
    }
    out
}

/// Marker for parameters whose map has no unique fixed point
/// (`I - M` singular): the dynamics are marginal along some direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no unique fixed point: I - M is singular")]
pub struct NoUniqueFixedPoint;

/// Solves `(I - M) v = c` for the unique stationary state.
pub fn fixed_point(params: &RichardsonParams) -> Result<PairState, NoUniqueFixedPoint> {
    let [[m11, m12], [m21, m22]] = params.matrix();
    let (a, b, c, d) = (1.0 - m11, -m12, -m21, 1.0 - m22);
    let det = a * d - b * c;
    if !det.is_finite() || det.abs() <= SINGULAR_TOL {
        return Err(NoUniqueFixedPoint);
    }
    let (c1, c2) = params.forcing();
    // Cramer's rule
    let v = PairState {
        v1: (c1 * d - b * c2) / det,
        v2: (a * c2 - c * c1) / det,
    };
    // Self-check; an ill-conditioned solve that is not stationary to 1e-9
    // (relative) is reported like the singular case.
    let s = step(v, params);
    let scale = 1.0_f64.max(v.v1.abs()).max(v.v2.abs());
    if (s.v1 - v.v1).abs() > 1e-9 * scale || (s.v2 - v.v2).abs() > 1e-9 * scale {
        return Err(NoUniqueFixedPoint);
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityClass {
    Stable,
    Marginal,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    pub class: StabilityClass,
    pub spectral_radius: f64,
}

/// Largest eigenvalue magnitude of a 2x2 matrix.
pub fn spectral_radius(m: [[f64; 2]; 2]) -> f64 {
    let trace = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let half = 0.5 * trace;
    let disc = half * half - det;
    if disc >= 0.0 {
        let root = disc.sqrt();
        (half + root).abs().max((half - root).abs())
    } else {
        // complex pair; |lambda|^2 = det
        det.sqrt()
    }
}

pub fn stability(params: &RichardsonParams) -> Stability {
    let spectral_radius = spectral_radius(params.matrix());
    let class = if spectral_radius < 1.0 - MARGINAL_TOL {
        StabilityClass::Stable
    } else if spectral_radius > 1.0 + MARGINAL_TOL {
        StabilityClass::Unstable
    } else {
        StabilityClass::Marginal
    };
    Stability {
        class,
        spectral_radius,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn symmetric() -> RichardsonParams {
        RichardsonParams {
            delta1: 0.25,
            delta2: 0.25,
            alpha1: -0.5,
            alpha2: -0.5,
            g1: 1.0,
            g2: 1.0,
            h1: 1.0,
            h2: 1.0,
        }
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(5.0, 3.0), 2.0);
        assert_eq!(delta(1.7, 1.7), 0.0);
        assert!((delta(2.6, 3.2) - -0.6).abs() < 1e-15);
    }

    #[test]
    fn mirror_delta_examples() {
        let with = |d| RichardsonParams {
            delta1: d,
            ..Default::default()
        };
        assert_eq!(mirror_delta(&with(1.0), 0.5), 0.5);
        assert_eq!(mirror_delta(&with(0.0), 123.0), 0.0);
        assert_eq!(mirror_delta(&with(-0.5), 2.0), -1.0);
    }

    #[test]
    fn step_examples() {
        let s = PairState::new(3.0, 4.0);
        assert_eq!(step(s, &RichardsonParams::identity()), s);

        let copy = RichardsonParams {
            alpha1: -1.0,
            delta1: 1.0,
            ..Default::default()
        };
        assert_eq!(step(s, &copy).v1, 4.0);

        let traj = simulate(PairState::default(), &symmetric(), 3);
        assert_eq!(traj[1], PairState::new(1.0, 1.0));
        assert_eq!(traj[2], PairState::new(1.75, 1.75));
        assert_eq!(traj[3], PairState::new(2.3125, 2.3125));
    }

    #[test]
    fn simulate_lengths() {
        let s = PairState::new(-1.0, 2.0);
        assert_eq!(simulate(s, &symmetric(), 0), vec![s]);
        assert_eq!(simulate(s, &RichardsonParams::identity(), 5), vec![s; 6]);
    }

    #[test]
    fn fixed_point_examples() {
        assert_eq!(
            fixed_point(&RichardsonParams::identity()),
            Err(NoUniqueFixedPoint)
        );

        // (I - M) = [[0.5, -0.25], [-0.25, 0.5]], c = (1, 1): v = 1 / 0.25 = 4
        let v = fixed_point(&symmetric()).unwrap();
        assert!((v.v1 - 4.0).abs() < 1e-12 && (v.v2 - 4.0).abs() < 1e-12);

        let decoupled = RichardsonParams {
            alpha1: -0.5,
            alpha2: -0.5,
            g1: 1.0,
            h1: 1.0,
            g2: 2.0,
            h2: 1.0,
            ..Default::default()
        };
        let v = fixed_point(&decoupled).unwrap();
        assert!((v.v1 - 2.0).abs() < 1e-12 && (v.v2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn stability_examples() {
        let diag = RichardsonParams {
            alpha1: -0.5,
            alpha2: -0.5,
            ..Default::default()
        };
        let s = stability(&diag);
        assert_eq!(s.class, StabilityClass::Stable);
        assert!((s.spectral_radius - 0.5).abs() < 1e-15);

        let s = stability(&RichardsonParams::identity());
        assert_eq!(s.class, StabilityClass::Marginal);
        assert_eq!(s.spectral_radius, 1.0);

        let coupled = RichardsonParams {
            delta1: 0.5,
            delta2: 0.5,
            ..Default::default()
        };
        let s = stability(&coupled);
        assert_eq!(s.class, StabilityClass::Unstable);
        assert!((s.spectral_radius - 1.5).abs() < 1e-15);

        assert_eq!(
            stability(&RichardsonParams::damped_coupled()).class,
            StabilityClass::Stable
        );
    }

    #[test]
    fn complex_eigenvalues_use_determinant() {
        // rotation-like matrix [[0.6, -0.8], [0.8, 0.6]] has |lambda| = 1
        let p = RichardsonParams {
            alpha1: -0.4,
            alpha2: -0.4,
            delta1: -0.8,
            delta2: 0.8,
            ..Default::default()
        };
        let s = stability(&p);
        assert!((s.spectral_radius - 1.0).abs() < 1e-12);
        assert_eq!(s.class, StabilityClass::Marginal);
    }

    fn coeff() -> impl Strategy<Value = f64> {
        -2.0..2.0f64
    }

    proptest! {
        #[test]
        fn step_is_affine_without_forcing(
            a in 0.0..1.0f64,
            d1 in coeff(), d2 in coeff(), a1 in coeff(), a2 in coeff(),
            s1 in (coeff(), coeff()), s2 in (coeff(), coeff()),
        ) {
            let p = RichardsonParams { delta1: d1, delta2: d2, alpha1: a1, alpha2: a2, ..Default::default() };
            let (x, y) = (PairState::new(s1.0, s1.1), PairState::new(s2.0, s2.1));
            let mix = PairState::new(a * x.v1 + (1.0 - a) * y.v1, a * x.v2 + (1.0 - a) * y.v2);
            let lhs = step(mix, &p);
            let (sx, sy) = (step(x, &p), step(y, &p));
            prop_assert!((lhs.v1 - (a * sx.v1 + (1.0 - a) * sy.v1)).abs() < 1e-12);
            prop_assert!((lhs.v2 - (a * sx.v2 + (1.0 - a) * sy.v2)).abs() < 1e-12);
        }

        #[test]
        fn consecutive_deltas_follow_rate_form(
            d1 in coeff(), d2 in coeff(), a1 in -1.5..0.5f64, a2 in -1.5..0.5f64,
            g1 in coeff(), h1 in coeff(), g2 in coeff(), h2 in coeff(),
            v1 in coeff(), v2 in coeff(),
        ) {
            let p = RichardsonParams { delta1: d1, delta2: d2, alpha1: a1, alpha2: a2, g1, g2, h1, h2 };
            let traj = simulate(PairState::new(v1, v2), &p, 6);
            for w in traj.windows(2) {
                let (prev, now) = (w[0], w[1]);
                let rate1 = p.alpha1 * prev.v1 + p.delta1 * prev.v2 + p.g1 * p.h1;
                let rate2 = p.alpha2 * prev.v2 + p.delta2 * prev.v1 + p.g2 * p.h2;
                let tol = 1e-9 * (1.0 + now.v1.abs() + prev.v1.abs() + now.v2.abs() + prev.v2.abs());
                prop_assert!((delta(now.v1, prev.v1) - rate1).abs() <= tol);
                prop_assert!((delta(now.v2, prev.v2) - rate2).abs() <= tol);
            }
        }

        #[test]
        fn unit_mirroring_copies_previous_change(prev in coeff(), now in coeff()) {
            let p = RichardsonParams { delta1: 1.0, ..Default::default() };
            prop_assert_eq!(mirror_delta(&p, delta(now, prev)), delta(now, prev));
        }

        #[test]
        fn fixed_point_is_stationary(
            d1 in coeff(), d2 in coeff(), a1 in coeff(), a2 in coeff(),
            g1 in coeff(), h1 in coeff(), g2 in coeff(), h2 in coeff(),
        ) {
            let p = RichardsonParams { delta1: d1, delta2: d2, alpha1: a1, alpha2: a2, g1, g2, h1, h2 };
            if let Ok(v) = fixed_point(&p) {
                let s = step(v, &p);
                let scale = 1.0_f64.max(v.v1.abs()).max(v.v2.abs());
                prop_assert!((s.v1 - v.v1).abs() <= 1e-9 * scale);
                prop_assert!((s.v2 - v.v2).abs() <= 1e-9 * scale);
            }
        }
    }
}
