use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use flowcat_linalg::Rational;

use crate::{OracleError, PairingKey, PairingOracle, PairingValue};

pub type Density = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((1.0 - x) / 2.0, w / 2.0));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// A parametrized piece of a moduli product. The density is the pulled-back
/// integrand on the unit cube, orientation sign included.
#[derive(Clone)]
pub struct Chart {
    pub dim: usize,
    pub integrand_degree: i64,
    density: Density,
}

impl Chart {
    pub fn new(dim: usize, integrand_degree: i64, density: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Chart { dim, integrand_degree, density: Arc::new(density) }
    }

    /// A signed point.
    pub fn point(value: f64) -> Self {
        Chart::new(0, 0, move |_| value)
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        (self.density)(x)
    }

    pub fn short_circuits(&self) -> bool {
        self.integrand_degree != self.dim as i64
    }
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart").field("dim", &self.dim).field("integrand_degree", &self.integrand_degree).finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureReport {
    pub raw: f64,
    pub snapped: Option<Rational>,
    pub refinements: usize,
    pub evaluations: usize,
    pub short_circuited: bool,
}

#[derive(Debug, Clone)]
pub struct QuadratureOracle {
    charts: BTreeMap<PairingKey, Vec<Chart>>,
    pub order: usize,
    pub tolerance: f64,
    pub snap_tolerance: f64,
    pub max_denominator: u32,
    pub max_evaluations: usize,
}

impl Default for QuadratureOracle {
    fn default() -> Self {
        QuadratureOracle {
            charts: BTreeMap::new(),
            order: 8,
            tolerance: 1e-10,
            snap_tolerance: 1e-6,
            max_denominator: 16,
            max_evaluations: 1 << 22,
        }
    }
}

impl QuadratureOracle {
    pub fn new() -> Self {
        QuadratureOracle::default()
    }

    pub fn register(&mut self, key: PairingKey, chart: Chart) {
        self.charts.entry(key).or_default().push(chart);
    }

    pub fn keys(&self) -> impl Iterator<Item = &PairingKey> {
        self.charts.keys()
    }

    pub fn evaluate(&self, key: &PairingKey) -> Result<Option<QuadratureReport>, OracleError> {
        let Some(charts) = self.charts.get(key) else {
            return Ok(None);
        };
        let mut report =
            QuadratureReport { raw: 0.0, snapped: None, refinements: 0, evaluations: 0, short_circuited: true };
        for chart in charts.iter().filter(|c| !c.short_circuits()) {
            report.short_circuited = false;
            let (v, refinements, evals) = self.integrate(chart).map_err(|(a, b)| OracleError::NotConverged {
                key: key.to_string(),
                a,
                b,
            })?;
            report.raw += v;
            report.refinements = report.refinements.max(refinements);
            report.evaluations += evals;
        }
        report.snapped = if report.short_circuited {
            Some(Rational::zero())
        } else {
            Rational::snap(report.raw, self.max_denominator, self.snap_tolerance)
        };
        Ok(Some(report))
    }

    fn integrate(&self, chart: &Chart) -> Result<(f64, usize, usize), (f64, f64)> {
        if chart.dim == 0 {
            return Ok((chart.density(&[]), 0, 1));
        }
        let rule = gauss_legendre(self.order);
        let mut evals = 0;
        let mut prev = self.composite(chart, &rule, 1);
        evals += self.order.pow(chart.dim as u32);
        let mut panels = 2;
        let mut refinements = 1;
        loop {
            let cost = (panels * self.order).pow(chart.dim as u32);
            if evals + cost > self.max_evaluations {
                return Err((prev, f64::NAN));
            }
            let cur = self.composite(chart, &rule, panels);
            evals += cost;
            if (cur - prev).abs() < self.tolerance {
                return Ok((cur, refinements, evals));
            }
            if evals + (2 * panels * self.order).pow(chart.dim as u32) > self.max_evaluations {
                return Err((prev, cur));
            }
            prev = cur;
            panels *= 2;
            refinements += 1;
        }
    }

    fn composite(&self, chart: &Chart, rule: &[(f64, f64)], panels: usize) -> f64 {
        let per_axis: Vec<(f64, f64)> = (0..panels)
            .flat_map(|p| rule.iter().map(move |&(x, w)| ((p as f64 + x) / panels as f64, w / panels as f64)))
            .collect();
        let n = per_axis.len();
        let mut idx = vec![0usize; chart.dim];
        let mut x = vec![0.0; chart.dim];
        let mut total = 0.0;
        loop {
            let mut w = 1.0;
            for (d, &i) in idx.iter().enumerate() {
                x[d] = per_axis[i].0;
                w *= per_axis[i].1;
            }
            total += w * chart.density(&x);
            let mut d = 0;
            while d < chart.dim {
                idx[d] += 1;
                if idx[d] < n {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == chart.dim {
                return total;
            }
        }
    }
}

impl PairingOracle for QuadratureOracle {
    fn pairing(&self, key: &PairingKey) -> Result<Option<PairingValue>, OracleError> {
        let Some(report) = self.evaluate(key)? else {
            return Ok(None);
        };
        match report.snapped {
            Some(v) => Ok(Some(PairingValue {
                value: v,
                exact: true,
                raw: (!report.short_circuited).then_some(report.raw),
            })),
            None => Err(OracleError::NotRational { key: key.to_string(), value: report.raw }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle_kernel;
    use std::f64::consts::PI;

    fn key() -> PairingKey {
        PairingKey::category(&[0, 1], 0, 0)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(5);
        let w: f64 = rule.iter().map(|p| p.1).sum();
        assert!((w - 1.0).abs() < 1e-14);
        let m9: f64 = rule.iter().map(|&(x, w)| w * x.powi(9)).sum();
        assert!((m9 - 0.1).abs() < 1e-14);
    }

    #[test]
    fn identity_circle_chart_snaps_to_one() {
        let mut q = QuadratureOracle::new();
        q.register(key(), Chart::new(1, 1, |_| 1.0));
        let v = q.pairing(&key()).unwrap().unwrap();
        assert_eq!(v.value, Rational::one());
        assert!(v.exact);
    }

    #[test]
    fn degree_mismatch_short_circuits() {
        let mut q = QuadratureOracle::new();
        q.register(key(), Chart::new(1, 0, |_| panic!("must not be evaluated")));
        let r = q.evaluate(&key()).unwrap().unwrap();
        assert!(r.short_circuited && r.evaluations == 0);
        assert_eq!(r.snapped, Some(Rational::zero()));
    }

    #[test]
    fn unsnappable_value_is_loud() {
        let mut q = QuadratureOracle::new();
        q.register(key(), Chart::new(1, 1, |x| (x[0] * PI).sin()));
        assert!(matches!(q.pairing(&key()), Err(OracleError::NotRational { .. })));
    }

    #[test]
    fn discontinuous_density_does_not_converge() {
        let mut q = QuadratureOracle { max_evaluations: 1 << 12, ..QuadratureOracle::new() };
        q.register(key(), Chart::new(2, 2, |x| if x[0] + x[1] < 1.0 / 3.0 { 1.0 } else { 0.0 }));
        assert!(matches!(q.pairing(&key()), Err(OracleError::NotConverged { .. })));
    }

    #[test]
    fn repeated_queries_are_bit_identical() {
        let mut q = QuadratureOracle::new();
        q.register(key(), Chart::new(2, 2, |x| (x[0] * x[1]).exp()));
        let a = q.evaluate(&key()).unwrap().unwrap().raw;
        let b = q.evaluate(&key()).unwrap().unwrap().raw;
        assert_eq!(a.to_bits(), b.to_bits());
    }

    // Independent oracle: adaptive Simpson in the original angle coordinates.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = (a + b) / 2.0;
            let (lm, rm) = ((a + m) / 2.0, (m + b) / 2.0);
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let (fa, fm, fb) = (f(a), f((a + b) / 2.0), f(b));
        rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth)
    }

    #[test]
    fn kernel_triple_pairing_on_fibered_chart() {
        // ∫∫ f(θ₁,θ₂) · (−u/2π) dθ₁ dθ₂ / 4π², with u the fiber angle θ₂ − θ₁.
        let tau = 2.0 * PI;
        let mut q = QuadratureOracle::new();
        q.register(
            key(),
            Chart::new(2, 2, move |x| {
                let (t1, u) = (x[0] * tau, x[1] * tau);
                circle_kernel(t1, t1 + u) * -(u / tau)
            }),
        );
        let v = q.pairing(&key()).unwrap().unwrap();

        let inner = |t2: f64| {
            let g = |t1: f64| circle_kernel(t1, t2) * -((t2 - t1).rem_euclid(tau) / tau);
            simpson(&g, 0.0, t2, 1e-11, 40) + simpson(&g, t2, tau, 1e-11, 40)
        };
        let independent = simpson(&|t2| inner(t2.max(1e-9)), 0.0, tau, 1e-10, 30) / (tau * tau);
        assert!((independent - 1.0 / 12.0).abs() < 1e-7, "{independent}");
        assert_eq!(v.value, Rational::new(1, 12));
        assert!((v.raw.unwrap() - independent).abs() < 1e-7);
    }

    // Fiber-product replacement over the circle: A and B are circles mapped
    // identically to a circle level with c = 1, and m = dim A = 1. A narrow
    // bump ρ(θ_b − θ_a) d(θ_b − θ_a) stands in for the Dirac insertion; the
    // chart coordinates are (θ_a, w = θ_b − θ_a), oriented like (θ_a, θ_b).
    #[test]
    fn fiber_product_replacement_sign() {
        let tau = 2.0 * PI;
        let eps = 1e-3;
        let u = |t: f64| 1.0 + 0.5 * t.cos();
        let v = |t: f64| 2.0 + t.sin() + 0.25 * (2.0 * t).cos();
        let rho = |t: f64| (1.0 - t * t).powi(4) * 315.0 / 256.0;
        let fiber = simpson(&|t| u(t) * v(t), 0.0, tau, 1e-12, 40) / tau;
        let (c, m) = (1, 1);
        // |α| = 1, α = u dθ_a/2π, γ = v: α∧δ∧γ = u v ρ dθ_a∧dw/2π.
        // |α| = 0, α = u, γ = v dθ_b/2π: α∧δ∧γ = −u v ρ dθ_a∧dw/2π.
        for (alpha_deg, orient) in [(1, 1.0), (0, -1.0)] {
            let mut q = QuadratureOracle::new();
            let k = PairingKey::category(&[0, 1, 2], alpha_deg, 0);
            q.register(
                k.clone(),
                Chart::new(2, 2, move |x| {
                    let (ta, t) = (x[0] * tau, 2.0 * x[1] - 1.0);
                    orient * u(ta) * v(ta + eps * t) * rho(t) * 2.0
                }),
            );
            let limit = q.evaluate(&k).unwrap().unwrap().raw;
            let sign = if ((alpha_deg as i64 + m) * c) % 2 == 0 { 1.0 } else { -1.0 };
            assert!((limit - sign * fiber).abs() < 1e-5, "|α|={alpha_deg}: {limit} vs {}", sign * fiber);
        }
    }
}
