use std::f64::consts::PI;
use std::sync::Arc;

use flowcat_core::{assemble_morphism_map, ChainMap, FlowMorphismModel, Matrix, PairingKind};
use flowcat_oracles::MorseCountOracle;

use crate::category::{build_morse_flow_category, MorseCategory};
use crate::flow::rk4;
use crate::surface::{dist, SurfaceModel, Vec3};
use crate::{EngineConfig, MorseError};

const LIFT: f64 = 5.0;

fn beta(t: f64) -> (f64, f64) {
    let s = ((t - 1.0 / 3.0) * 3.0).clamp(0.0, 1.0);
    (s * s * (3.0 - 2.0 * s), 18.0 * s * (1.0 - s))
}

/// Gradient flow of `F + h` on `ℝ × M` with `F = (1−β) f₁ + β f₂` and
/// `h(t) = −A cos πt`, so `(C, 0)` and `(C', 1)` are the critical sets.
struct Interpolation<'a> {
    f1: &'a SurfaceModel,
    f2: &'a SurfaceModel,
    cfg: &'a EngineConfig,
}

impl Interpolation<'_> {
    fn value(&self, t: f64, p: Vec3) -> f64 {
        let (b, _) = beta(t);
        (1.0 - b) * self.f1.value(p) + b * self.f2.value(p) - LIFT * (PI * t).cos()
    }

    fn field(&self, chart: usize, y: &[f64], dir: f64) -> [f64; 3] {
        let (t, uv) = (y[0], [y[1], y[2]]);
        let (b, db) = beta(t);
        let p = self.f1.chart(chart).embed(uv);
        let (d1, d2) = (self.f1.differential(chart, uv), self.f2.differential(chart, uv));
        let dx = [(1.0 - b) * d1[0] + b * d2[0], (1.0 - b) * d1[1] + b * d2[1]];
        let gx = crate::surface::solve2(self.f1.chart(chart).metric(uv), dx);
        let gt = db * (self.f2.value(p) - self.f1.value(p)) + LIFT * PI * (PI * t).sin();
        let n = (gt * gt + dx[0] * gx[0] + dx[1] * gx[1]).sqrt();
        [dir * gt / n, dir * gx[0] / n, dir * gx[1] / n]
    }

    fn derivative(&self, chart: usize, y: &[f64], dir: f64) -> Vec<f64> {
        let mut out = self.field(chart, y, dir).to_vec();
        for d in y[3..].chunks(3) {
            let eta = 1e-6 / (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            let plus: Vec<f64> = (0..3).map(|i| y[i] + eta * d[i]).collect();
            let minus: Vec<f64> = (0..3).map(|i| y[i] - eta * d[i]).collect();
            let (a, b) = (self.field(chart, &plus, dir), self.field(chart, &minus, dir));
            out.extend((0..3).map(|i| (a[i] - b[i]) / (2.0 * eta)));
        }
        out
    }

    /// Flow from `(t, p)` until within the arrival radius of an end in
    /// `ends`. Frames are `(∂t component, ambient vector)`.
    #[allow(clippy::type_complexity)]
    fn trace(
        &self,
        mut t: f64,
        mut p: Vec3,
        frame: &[(f64, Vec3)],
        dir: f64,
        ends: &[(f64, Vec3)],
    ) -> Result<(usize, Vec<(f64, Vec3)>, (f64, Vec3)), MorseError> {
        let cfg = self.cfg;
        let mut frame = frame.to_vec();
        let mut value = self.value(t, p);
        let mut h = cfg.h_max;
        for _ in 0..cfg.max_steps {
            let d3 = |e: &(f64, Vec3)| ((t - e.0).powi(2) + dist(p, e.1).powi(2)).sqrt();
            let (near, d_near) = ends
                .iter()
                .enumerate()
                .map(|(i, e)| (i, d3(e)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("ends are nonempty");
            let (ci, uv) = self.f1.best_chart(p);
            let chart = self.f1.chart(ci);
            if d_near < cfg.arrival_radius {
                let v = self.field(ci, &[t, uv[0], uv[1]], 1.0);
                return Ok((near, frame, (v[0], chart.push_vector(uv, [v[1], v[2]]))));
            }
            let mut y = vec![t, uv[0], uv[1]];
            for (dt, v) in &frame {
                let w = chart.pull_vector(uv, *v);
                y.extend([*dt, w[0], w[1]]);
            }
            let f = |y: &[f64]| self.derivative(ci, y, dir);
            h = h.min(0.5 * d_near).clamp(cfg.h_min, cfg.h_max);
            let next = loop {
                let full = rk4(&f, &y, h);
                let half = rk4(&f, &rk4(&f, &y, h / 2.0), h / 2.0);
                let err = (full[0] - half[0]).abs() + dist(chart.embed([full[1], full[2]]), chart.embed([half[1], half[2]]));
                if err > cfg.step_tol && h > cfg.h_min {
                    h = (h / 2.0).max(cfg.h_min);
                    continue;
                }
                if err < cfg.step_tol / 32.0 {
                    h = (2.0 * h).min(cfg.h_max);
                }
                break half;
            };
            let uv2 = [next[1], next[2]];
            let (t2, p2) = (next[0], chart.embed(uv2));
            let v2 = self.value(t2, p2);
            if !(dir * (v2 - value) > 0.0) {
                return Err(MorseError::NotMonotone { at: p2, before: value, after: v2 });
            }
            frame = next[3..]
                .chunks(3)
                .map(|d| {
                    let v = chart.push_vector(uv2, [d[1], d[2]]);
                    let len = (d[0] * d[0] + crate::surface::dot(v, v)).sqrt();
                    (d[0] / len, v.map(|x| x / len))
                })
                .collect();
            (t, p, value) = (t2, p2, v2);
        }
        Err(MorseError::Runaway { from: p, steps: cfg.max_steps })
    }
}

/// Continuation from the height function to a tilted height on the sphere.
#[derive(Debug, Clone)]
pub struct Continuation {
    pub source: MorseCategory,
    pub target: MorseCategory,
    /// Rigid lines as (source point, target point, sign).
    pub lines: Vec<(usize, usize, i64)>,
    pub morphism: FlowMorphismModel,
    pub counts: MorseCountOracle,
}

impl Continuation {
    pub fn chain_map(&self) -> Result<ChainMap, MorseError> {
        Ok(assemble_morphism_map(&self.morphism)?)
    }
}

/// Orientation of the descending space at `(q, 1)` is `(−∂t) ∧ o_q`.
fn end_sign(s: &SurfaceModel, at: Vec3, vs: &[(f64, Vec3)], o: i64) -> i64 {
    let (ci, uv) = s.best_chart(at);
    let c = s.chart(ci);
    let cols: Vec<[f64; 3]> = vs
        .iter()
        .map(|(dt, v)| {
            let w = c.pull_vector(uv, *v);
            [-dt, w[0], w[1]]
        })
        .collect();
    let det = match cols.as_slice() {
        [a] => a[0],
        [a, b, d] => {
            a[0] * (b[1] * d[2] - b[2] * d[1]) - b[0] * (a[1] * d[2] - a[2] * d[1]) + d[0] * (a[1] * b[2] - a[2] * b[1])
        }
        _ => 0.0,
    };
    det.signum() as i64 * o
}

pub fn sphere_continuation(tilt: f64, cfg: &EngineConfig) -> Result<Continuation, MorseError> {
    let f1 = SurfaceModel::sphere_height();
    let f2 = SurfaceModel::sphere_tilted_height(tilt);
    let source = build_morse_flow_category(&f1, cfg)?;
    let target = build_morse_flow_category(&f2, cfg)?;
    if source.critical.len() != 2 || target.critical.len() != 2 {
        return Err(MorseError::Unsupported("continuation is built for two-point spheres".into()));
    }
    let run = Interpolation { f1: &f1, f2: &f2, cfg };
    let mut ends: Vec<(f64, Vec3)> = source.critical.iter().map(|c| (0.0, c.point)).collect();
    ends.extend(target.critical.iter().map(|c| (1.0, c.point)));
    let eps = cfg.seed_radius;
    let mut lines = Vec::new();
    // Minimum to minimum: the descending line of (min₂, 1) is the t direction.
    let (min2, max1) = (&target.critical[0], &source.critical[1]);
    let (ci, uv) = f1.best_chart(min2.point);
    let v = run.field(ci, &[1.0 - eps, uv[0], uv[1]], -1.0);
    let away = (v[0], f1.chart(ci).push_vector(uv, [v[1], v[2]]));
    let (end, _, _) = run.trace(1.0 - eps, min2.point, &[], -1.0, &ends)?;
    if end != 0 {
        return Err(MorseError::Unsupported("minimum line did not reach the source minimum".into()));
    }
    lines.push((0, 0, end_sign(&f2, min2.point, &[away], min2.orientation as i64)));
    // Maximum to maximum: the ascending line of (max₁, 0) is the t direction.
    let frame: Vec<(f64, Vec3)> = max1.descending().into_iter().map(|v| (0.0, v)).collect();
    let (end, frame, v) = run.trace(eps, max1.point, &frame, 1.0, &ends)?;
    if end != 3 {
        return Err(MorseError::Unsupported("maximum line did not reach the target maximum".into()));
    }
    let max2 = &target.critical[1];
    let mut vs = vec![(-v.0, v.1.map(|x| -x))];
    vs.extend(frame);
    lines.push((1, 1, end_sign(&f2, max2.point, &vs, max2.orientation as i64 * max1.orientation as i64)));
    let counts = MorseCountOracle::new()
        .with(PairingKind::Morphism, 0, 0, Matrix::from_i64(&[&[lines[0].2]]))
        .with(PairingKind::Morphism, 1, 1, Matrix::from_i64(&[&[lines[1].2]]));
    let morphism =
        FlowMorphismModel::new(source.model.clone(), target.model.clone(), [(0, 0, 0), (0, 1, 2), (1, 1, 0)], Arc::new(counts.clone()))?;
    Ok(Continuation { source, target, lines, morphism, counts })
}
