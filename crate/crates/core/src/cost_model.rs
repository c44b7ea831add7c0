//! Analytical time, cost and speedup estimates for the island model on a
//! hierarchical PRAM: a host plus `g` processors with `c` cores each.
//!
//! Big-O constants are normalized to 1; the per-operation coefficients allow
//! calibration against measured timings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cores per processor and problem size used by the published speedup curve.
pub const REFERENCE_CORES: f64 = 448.0;
pub const DEFAULT_FREQUENCY: f64 = 50.0;
pub const DEFAULT_LOG_BASE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModelInput {
    /// Islands.
    pub g: f64,
    /// Cores per island, equal to the population size.
    pub c: f64,
    /// Problem size.
    pub n: f64,
    /// Iterations.
    pub i: f64,
    /// Migration frequency.
    pub f: f64,
    /// Migrants per exchange.
    pub e: f64,
    pub pr_cross: f64,
    pub pr_mut: f64,
    pub cross_coeff: f64,
    pub mut_coeff: f64,
    pub eval_coeff: f64,
    pub log_base: f64,
}

impl Default for CostModelInput {
    fn default() -> Self {
        Self {
            g: 1.0,
            c: REFERENCE_CORES,
            n: REFERENCE_CORES,
            i: 1000.0,
            f: DEFAULT_FREQUENCY,
            e: 2.0,
            pr_cross: 2.0 / REFERENCE_CORES,
            pr_mut: 0.15,
            cross_coeff: 1.0,
            mut_coeff: 1.0,
            eval_coeff: 1.0,
            log_base: DEFAULT_LOG_BASE,
        }
    }
}

/// Per-iteration and one-off terms of the time estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeBreakdown {
    pub init: f64,
    pub cross: f64,
    pub mutation: f64,
    pub eval: f64,
    pub inner_selection: f64,
    pub outer_selection: f64,
    pub total: f64,
}

impl CostModelInput {
    pub fn validate(&self) -> Result<()> {
        let counts = [("g", self.g), ("c", self.c), ("n", self.n)];
        for (name, v) in counts {
            if !(v >= 1.0 && v.is_finite()) {
                return Err(Error::InvalidParam(format!("{name} = {v} must be at least 1")));
            }
        }
        if !(self.i >= 0.0 && self.e >= 0.0) {
            return Err(Error::InvalidParam("i and e must be nonnegative".into()));
        }
        if !(self.f >= 1.0) {
            return Err(Error::InvalidParam(format!("f = {} must be at least 1", self.f)));
        }
        for (name, p) in [("pr_cross", self.pr_cross), ("pr_mut", self.pr_mut)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParam(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if !(self.log_base > 1.0) {
            return Err(Error::InvalidParam(format!("log base {} must exceed 1", self.log_base)));
        }
        Ok(())
    }

    fn log(&self, x: f64) -> f64 {
        x.log(self.log_base)
    }

    pub fn breakdown(&self) -> Result<TimeBreakdown> {
        self.validate()?;
        let pairs = self.c * (self.c - 1.0) / 2.0;
        let init = self.n;
        let cross = self.pr_cross * self.cross_coeff * self.n * pairs / self.c;
        let mutation = self.pr_mut * self.mut_coeff * self.n;
        let eval = self.eval_coeff * self.n;
        let inner_selection = self.log(self.c + pairs * self.pr_cross);
        let outer_selection = self.log(self.c + self.e * (self.g - 1.0));
        let total = init
            + self.i * (cross + mutation + eval + inner_selection)
            + self.i / self.f * outer_selection;
        Ok(TimeBreakdown {
            init,
            cross,
            mutation,
            eval,
            inner_selection,
            outer_selection,
            total,
        })
    }
}

/// Total parallel running time.
pub fn time_estimate(input: &CostModelInput) -> Result<f64> {
    Ok(input.breakdown()?.total)
}

/// Processor-time product `g · c · T`.
pub fn cost_estimate(input: &CostModelInput) -> Result<f64> {
    Ok(input.g * input.c * time_estimate(input)?)
}

/// Time with migrants and mutation treated as constants:
/// `i·n + (i/f)·n·log(c + g)`.
pub fn simplified_time_estimate(input: &CostModelInput) -> Result<f64> {
    input.validate()?;
    let CostModelInput { g, c, n, i, f, .. } = *input;
    Ok(i * n + i / f * n * input.log(c + g))
}

/// The simplified cost bound as printed: `c·(g·i·n + (i/f)·g²)`.
pub fn simplified_cost_estimate(input: &CostModelInput) -> Result<f64> {
    input.validate()?;
    let CostModelInput { g, c, n, i, f, .. } = *input;
    Ok(c * (g * i * n + i / f * g * g))
}

/// Equal-total-work speedup `n·g / (n + (1/f)·n·log g)` with the given log base.
pub fn speedup_with_base(g: usize, f: f64, log_base: f64) -> Result<f64> {
    if g < 1 {
        return Err(Error::InvalidParam("speedup needs at least one island".into()));
    }
    if !(f > 0.0) || !(log_base > 1.0) {
        return Err(Error::InvalidParam(format!(
            "frequency {f} and log base {log_base} must be positive and above 1"
        )));
    }
    let n = REFERENCE_CORES;
    let g = g as f64;
    Ok(n * g / (n + (1.0 / f) * n * g.log(log_base)))
}

/// Speedup at `c = n = 448` with base-2 logarithms.
pub fn speedup(g: usize, f: f64) -> Result<f64> {
    speedup_with_base(g, f, DEFAULT_LOG_BASE)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedupRow {
    pub g: usize,
    pub s_theoretical: f64,
}

/// `speedup(g, f)` for `g = 1..=g_max`.
pub fn speedup_curve(g_max: usize, f: f64) -> Result<Vec<SpeedupRow>> {
    if g_max < 1 {
        return Err(Error::InvalidParam("g_max must be at least 1".into()));
    }
    (1..=g_max)
        .map(|g| Ok(SpeedupRow { g, s_theoretical: speedup(g, f)? }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn plain(i: f64) -> CostModelInput {
        CostModelInput {
            g: 3.0,
            c: 16.0,
            n: 40.0,
            i,
            f: 10.0,
            e: 2.0,
            pr_cross: 0.1,
            pr_mut: 0.2,
            ..CostModelInput::default()
        }
    }

    #[test]
    fn zero_iterations_is_init() {
        assert_eq!(time_estimate(&plain(0.0)).unwrap(), 40.0);
    }

    #[test]
    fn collapsed_terms() {
        let input = CostModelInput {
            g: 1.0,
            e: 0.0,
            pr_cross: 0.0,
            pr_mut: 0.0,
            eval_coeff: 1.5,
            ..plain(7.0)
        };
        let expected = 40.0 + 7.0 * (1.5 * 40.0 + 4.0) + 0.7 * 4.0;
        assert_relative_eq!(time_estimate(&input).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn hand_evaluated_spot_value() {
        // c = 16: 120 pairs, pr_cross·120 = 12, inner sort over 28 genomes;
        // outer sort over 16 + 2·2 = 20 genomes.
        let input = plain(5.0);
        let per_iter = 0.1 * 40.0 * 120.0 / 16.0 + 0.2 * 40.0 + 40.0 + 28f64.log2();
        let expected = 40.0 + 5.0 * per_iter + 0.5 * 20f64.log2();
        assert_relative_eq!(time_estimate(&input).unwrap(), expected, epsilon = 1e-12);
        assert_relative_eq!(cost_estimate(&input).unwrap(), 48.0 * expected, epsilon = 1e-9);
    }

    #[test]
    fn cost_scales_with_processors() {
        let one = CostModelInput { g: 1.0, c: 1.0, ..plain(9.0) };
        assert_eq!(cost_estimate(&one).unwrap(), time_estimate(&one).unwrap());
        let g2 = CostModelInput { g: 2.0, ..plain(9.0) };
        let g4 = CostModelInput { g: 4.0, ..plain(9.0) };
        let ratio = cost_estimate(&g4).unwrap() / cost_estimate(&g2).unwrap();
        let t_ratio = time_estimate(&g4).unwrap() / time_estimate(&g2).unwrap();
        assert_relative_eq!(ratio, 2.0 * t_ratio, epsilon = 1e-12);
    }

    #[test]
    fn simplified_forms() {
        let input = plain(10.0);
        let t = simplified_time_estimate(&input).unwrap();
        assert_relative_eq!(t, 400.0 + 40.0 * 19f64.log2(), epsilon = 1e-12);
        let c = simplified_cost_estimate(&input).unwrap();
        assert_relative_eq!(c, 16.0 * (3.0 * 10.0 * 40.0 + 9.0), epsilon = 1e-12);
    }

    #[test]
    fn speedup_values() {
        assert_eq!(speedup(1, 50.0).unwrap(), 1.0);
        assert_relative_eq!(speedup(2, 50.0).unwrap(), 2.0 / 1.02, epsilon = 1e-12);
        assert_relative_eq!(speedup(4, 50.0).unwrap(), 4.0 / 1.04, epsilon = 1e-12);
        assert!(speedup(0, 50.0).is_err());
        let e = speedup_with_base(4, 50.0, std::f64::consts::E).unwrap();
        assert_relative_eq!(e, 4.0 / (1.0 + 4f64.ln() / 50.0), epsilon = 1e-12);
    }

    #[test]
    fn curve_rows() {
        assert_eq!(speedup_curve(1, 50.0).unwrap(), vec![SpeedupRow { g: 1, s_theoretical: 1.0 }]);
        let rows = speedup_curve(64, 50.0).unwrap();
        assert_eq!(rows.len(), 64);
        for w in rows.windows(2) {
            assert!(w[1].s_theoretical > w[0].s_theoretical);
        }
        for r in &rows {
            assert_eq!(r.s_theoretical, speedup(r.g, 50.0).unwrap());
            if r.g >= 2 {
                assert!(r.s_theoretical < r.g as f64 && r.s_theoretical >= 1.0);
            }
        }
        assert!(speedup_curve(0, 50.0).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_each_input(
            g in 1.0f64..64.0, c in 1.0f64..512.0, n in 1.0f64..1000.0, i in 0.0f64..1e4,
            e in 0.0f64..10.0, pc in 0.0f64..0.9, pm in 0.0f64..0.9, bump in 0.01f64..0.1,
        ) {
            let base = CostModelInput { g, c, n, i, e, pr_cross: pc, pr_mut: pm, ..CostModelInput::default() };
            let t0 = time_estimate(&base).unwrap();
            let c0 = cost_estimate(&base).unwrap();
            let variants = [
                CostModelInput { n: n + 1.0, ..base.clone() },
                CostModelInput { i: i + 1.0, ..base.clone() },
                CostModelInput { e: e + 1.0, ..base.clone() },
                CostModelInput { pr_cross: pc + bump, ..base.clone() },
                CostModelInput { pr_mut: pm + bump, ..base.clone() },
            ];
            for v in &variants {
                prop_assert!(time_estimate(v).unwrap() >= t0);
                prop_assert!(cost_estimate(v).unwrap() >= c0);
            }
            let next = CostModelInput { i: i + 1.0, ..base.clone() };
            prop_assert!(time_estimate(&next).unwrap() > t0);
        }
    }
}
