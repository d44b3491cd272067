
use crate::critical::CriticalPoint;
use crate::surface::{dist, dot, SurfaceModel, Vec2, Vec3};
use crate::{EngineConfig, MorseError};

#[derive(Debug, Clone, PartialEq)]
pub struct FlowLine {
    pub from: usize,
    pub to: usize,
    /// Seed parameter: an angle on the unstable circle, or ±1 for a branch.
    pub seed: f64,
    pub samples: Vec<Vec3>,
    pub sign: i64,
    pub arc_length: f64,
    pub min_gradient: f64,
}

impl FlowLine {
    /// Arc length is at most the rise in `f` over the smallest gradient seen.
    pub fn energy_bound_holds(&self, rise: f64) -> bool {
        self.arc_length <= rise / self.min_gradient * (1.0 + 1e-6) + 1e-9
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitCount {
    pub from: usize,
    pub to: usize,
    pub lines: Vec<FlowLine>,
}

impl OrbitCount {
    pub fn count(&self) -> i64 {
        self.lines.iter().map(|l| l.sign).sum()
    }
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub end: usize,
    pub samples: Vec<Vec3>,
    pub arc: f64,
    pub min_gradient: f64,
    pub frame: Vec<Vec3>,
    pub velocity: Vec3,
}

pub(crate) fn rk4(f: &dyn Fn(&[f64]) -> Vec<f64>, y: &[f64], h: f64) -> Vec<f64> {
    let add = |a: &[f64], b: &[f64], s: f64| a.iter().zip(b).map(|(x, y)| x + s * y).collect::<Vec<_>>();
    let k1 = f(y);
    let k2 = f(&add(y, &k1, h / 2.0));
    let k3 = f(&add(y, &k2, h / 2.0));
    let k4 = f(&add(y, &k3, h));
    (0..y.len()).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

/// Unit-speed gradient flow, traced by adaptive RK4 with step doubling.
pub struct Tracer<'a> {
    pub s: &'a SurfaceModel,
    pub crit: &'a [CriticalPoint],
    pub cfg: &'a EngineConfig,
    pub record: bool,
    /// 1 to ascend, −1 to descend.
    pub dir: f64,
}

impl Tracer<'_> {
    fn field(&self, chart: usize, uv: Vec2) -> Vec2 {
        let g = self.s.gradient(chart, uv);
        let n = self.s.gradient_norm(chart, uv) * self.dir;
        [g[0] / n, g[1] / n]
    }

    fn derivative(&self, chart: usize, y: &[f64]) -> Vec<f64> {
        let uv = [y[0], y[1]];
        let v = self.field(chart, uv);
        let mut out = vec![v[0], v[1]];
        for d in y[2..].chunks(2) {
            let eta = 1e-6 / (d[0] * d[0] + d[1] * d[1]).sqrt();
            let a = self.field(chart, [uv[0] + eta * d[0], uv[1] + eta * d[1]]);
            let b = self.field(chart, [uv[0] - eta * d[0], uv[1] - eta * d[1]]);
            out.push((a[0] - b[0]) / (2.0 * eta));
            out.push((a[1] - b[1]) / (2.0 * eta));
        }
        out
    }

    /// Flow upward from `start` until arriving at a critical point other than
    /// `from`, transporting `frame` by the linearized flow.
    pub fn trace(&self, from: usize, start: Vec3, frame: &[Vec3]) -> Result<Trace, MorseError> {
        let cfg = self.cfg;
        let mut p = start;
        let mut frame = frame.to_vec();
        let mut value = self.s.value(p);
        let mut h = cfg.h_max;
        let mut t = Trace {
            end: usize::MAX,
            samples: if self.record { vec![p] } else { Vec::new() },
            arc: 0.0,
            min_gradient: f64::INFINITY,
            frame: Vec::new(),
            velocity: [0.0; 3],
        };
        for _ in 0..cfg.max_steps {
            let (ci, uv) = self.s.best_chart(p);
            let chart = self.s.chart(ci);
            t.min_gradient = t.min_gradient.min(self.s.gradient_norm(ci, uv));
            let (near, d_near) = self
                .crit
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != from)
                .map(|(i, c)| (i, dist(p, c.point)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap_or((usize::MAX, f64::INFINITY));
            if d_near < cfg.arrival_radius {
                t.end = near;
                t.frame = frame;
                t.velocity = chart.push_vector(uv, self.field(ci, uv));
                return Ok(t);
            }
            let mut y = vec![uv[0], uv[1]];
            for n in &frame {
                y.extend(chart.pull_vector(uv, *n));
            }
            let f = |y: &[f64]| self.derivative(ci, y);
            h = h.min(0.5 * d_near).clamp(cfg.h_min, cfg.h_max);
            let next = loop {
                let full = rk4(&f, &y, h);
                let half = rk4(&f, &rk4(&f, &y, h / 2.0), h / 2.0);
                let err = dist(chart.embed([full[0], full[1]]), chart.embed([half[0], half[1]]));
                if err > cfg.step_tol && h > cfg.h_min {
                    h = (h / 2.0).max(cfg.h_min);
                    continue;
                }
                if err < cfg.step_tol / 32.0 {
                    h = (2.0 * h).min(cfg.h_max);
                }
                break half;
            };
            let uv2 = [next[0], next[1]];
            let p2 = chart.embed(uv2);
            let v2 = self.s.value(p2);
            if !(self.dir * (v2 - value) > 0.0) {
                return Err(MorseError::NotMonotone { at: p2, before: value, after: v2 });
            }
            frame = next[2..]
                .chunks(2)
                .map(|d| {
                    let n = chart.push_vector(uv2, [d[0], d[1]]);
                    let len = dot(n, n).sqrt();
                    n.map(|x| x / len)
                })
                .collect();
            t.arc += dist(p, p2);
            p = p2;
            value = v2;
            if self.record {
                t.samples.push(p);
            }
        }
        Err(MorseError::Runaway { from: self.crit[from].point, steps: cfg.max_steps })
    }
}

/// Orientation of the descending space of `q` evaluated on `vs`.
fn orientation_at(s: &SurfaceModel, q: &CriticalPoint, at: Vec3, vs: &[Vec3]) -> i64 {
    let o = q.orientation as i64;
    match vs {
        [v] => dot(*v, q.descending()[0]).signum() as i64 * o,
        [a, b] => {
            let (ci, uv) = s.best_chart(at);
            let c = s.chart(ci);
            let (x, y) = (c.pull_vector(uv, *a), c.pull_vector(uv, *b));
            (x[0] * y[1] - x[1] * y[0]).signum() as i64 * o
        }
        _ => o,
    }
}

impl Tracer<'_> {
    /// Trace with transport and record a flow line; the sign compares
    /// `(−V, transported frame)` with the chosen frame at the end point.
    fn line(&self, from: usize, start: Vec3, seed: f64) -> Result<(Trace, FlowLine), MorseError> {
        let p = &self.crit[from];
        let frame: Vec<Vec3> = p.descending().iter().map(|v| v.map(|x| x * p.orientation as f64)).collect();
        let t = self.trace(from, start, &frame)?;
        let q = &self.crit[t.end];
        let mut vs = vec![t.velocity.map(|x| -x)];
        vs.extend(t.frame.iter().copied());
        let sign = if q.index == p.index + 1 { orientation_at(self.s, q, q.point, &vs) } else { 0 };
        let line = FlowLine {
            from,
            to: t.end,
            seed,
            samples: t.samples.clone(),
            sign,
            arc_length: t.arc,
            min_gradient: t.min_gradient,
        };
        Ok((t, line))
    }
}

fn seed_point(s: &SurfaceModel, p: &CriticalPoint, dir: Vec3, r: f64) -> Vec3 {
    let c = s.chart(p.chart);
    let d = c.pull_vector(p.coords, dir);
    c.embed([p.coords[0] + r * d[0], p.coords[1] + r * d[1]])
}

/// All rigid flow lines leaving `from`, found by shooting from its unstable
/// sphere.
pub fn shoot_from(
    s: &SurfaceModel,
    crit: &[CriticalPoint],
    from: usize,
    cfg: &EngineConfig,
) -> Result<Vec<FlowLine>, MorseError> {
    let p = &crit[from];
    let tracer = Tracer { s, crit, cfg, record: true, dir: 1.0 };
    match p.index {
        1 => {
            let mut lines = Vec::new();
            for sigma in [1.0, -1.0] {
                let start = seed_point(s, p, p.ascending()[0].map(|x| sigma * x), cfg.seed_radius);
                let (_, line) = tracer.line(from, start, sigma)?;
                if crit[line.to].index == 1 {
                    return Err(MorseError::NonTransverse { from: p.point, to: crit[line.to].point });
                }
                if crit[line.to].index == 2 {
                    lines.push(line);
                }
            }
            Ok(lines)
        }
        0 => shoot_into_saddles(s, crit, from, cfg),
        _ => Ok(Vec::new()),
    }
}

/// Lines from a minimum, found by descending both branches of every saddle
/// above it.
fn shoot_into_saddles(
    s: &SurfaceModel,
    crit: &[CriticalPoint],
    from: usize,
    cfg: &EngineConfig,
) -> Result<Vec<FlowLine>, MorseError> {
    let down = Tracer { s, crit, cfg, record: true, dir: -1.0 };
    let mut lines = Vec::new();
    for (to, q) in crit.iter().enumerate() {
        if q.index != 1 || q.value <= crit[from].value {
            continue;
        }
        for sigma in [1.0, -1.0] {
            let e = q.descending()[0].map(|x| sigma * x);
            let t = down.trace(to, seed_point(s, q, e, cfg.seed_radius), &[])?;
            if crit[t.end].index == 1 {
                return Err(MorseError::NonTransverse { from: crit[t.end].point, to: q.point });
            }
            if t.end != from {
                continue;
            }
            let mut samples = t.samples;
            samples.reverse();
            lines.push(FlowLine {
                from,
                to,
                seed: sigma,
                samples,
                sign: orientation_at(s, q, q.point, &[e]),
                arc_length: t.arc,
                min_gradient: t.min_gradient,
            });
        }
    }
    Ok(lines)
}

/// Signed rigid count from `from` to `to`. Pairs whose index gap is not one
/// have no rigid lines and give an empty count.
pub fn count_connecting_orbits(
    s: &SurfaceModel,
    crit: &[CriticalPoint],
    from: usize,
    to: usize,
    cfg: &EngineConfig,
) -> Result<OrbitCount, MorseError> {
    if crit[to].index != crit[from].index + 1 || crit[to].value <= crit[from].value {
        return Ok(OrbitCount { from, to, lines: Vec::new() });
    }
    let lines = shoot_from(s, crit, from, cfg)?.into_iter().filter(|l| l.to == to).collect();
    Ok(OrbitCount { from, to, lines })
}
