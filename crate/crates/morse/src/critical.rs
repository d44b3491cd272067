use crate::surface::{dist, SurfaceModel, Vec2, Vec3};
use crate::{EngineConfig, MorseError};

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub chart: usize,
    pub coords: Vec2,
    pub point: Vec3,
    pub index: usize,
    pub value: f64,
    pub gradient_norm: f64,
    /// Eigenvalues of `g⁻¹H` in increasing order.
    pub eigenvalues: [f64; 2],
    /// Matching `g`-unit eigenvectors, as ambient vectors.
    pub eigenvectors: [Vec3; 2],
    /// Sign applied to the standard frame of the descending space.
    pub orientation: i8,
}

impl CriticalPoint {
    pub fn min_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues[0].abs().min(self.eigenvalues[1].abs())
    }

    /// Standard frame of the descending eigenspace: the eigenvector with its
    /// first significant ambient coordinate positive, or for a maximum the
    /// positively oriented eigenbasis.
    pub fn descending(&self) -> Vec<Vec3> {
        self.eigenvectors[..self.index].to_vec()
    }

    pub fn ascending(&self) -> Vec<Vec3> {
        self.eigenvectors[self.index..].to_vec()
    }
}

/// Symmetric 2×2 eigen-decomposition, eigenvalues increasing.
pub(crate) fn sym_eigen(a: [[f64; 2]; 2]) -> ([f64; 2], [Vec2; 2]) {
    let mean = 0.5 * (a[0][0] + a[1][1]);
    let half = 0.5 * (a[0][0] - a[1][1]);
    let r = (half * half + a[0][1] * a[0][1]).sqrt();
    let (lo, hi) = (mean - r, mean + r);
    let vec = |l: f64| -> Vec2 {
        let v = if a[0][1].abs() > 1e-300 {
            [a[0][1], l - a[0][0]]
        } else if (a[0][0] - l).abs() <= (a[1][1] - l).abs() {
            [1.0, 0.0]
        } else {
            [0.0, 1.0]
        };
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
        [v[0] / n, v[1] / n]
    };
    let v0 = vec(lo);
    ([lo, hi], [v0, [-v0[1], v0[0]]])
}

/// Eigenpairs of `g⁻¹H` with `g`-orthonormal eigenvectors.
pub(crate) fn metric_eigen(g: [[f64; 2]; 2], h: [[f64; 2]; 2]) -> ([f64; 2], [Vec2; 2]) {
    let a = g[0][0].sqrt();
    let b = g[0][1] / a;
    let c = (g[1][1] - b * b).sqrt();
    // A = L⁻¹ H L⁻ᵀ with L = [[a,0],[b,c]].
    let linv = [[1.0 / a, 0.0], [-b / (a * c), 1.0 / c]];
    let mut t = [[0.0; 2]; 2];
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            t[i][j] = (0..2).map(|k| linv[i][k] * h[k][j]).sum();
        }
    }
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = (0..2).map(|k| t[i][k] * linv[j][k]).sum();
        }
    }
    let (vals, ys) = sym_eigen(m);
    let back = |y: Vec2| -> Vec2 {
        let v1 = y[1] / c;
        [(y[0] - b * v1) / a, v1]
    };
    (vals, [back(ys[0]), back(ys[1])])
}

fn newton(s: &SurfaceModel, chart: usize, mut uv: Vec2, cfg: &EngineConfig) -> Option<Vec2> {
    for _ in 0..cfg.newton_iterations {
        if s.gradient_norm(chart, uv) < cfg.gradient_tol {
            return Some(uv);
        }
        let df = s.differential(chart, uv);
        let (vals, vecs) = sym_eigen(s.hessian(chart, uv));
        let scale = vals[0].abs().max(vals[1].abs());
        if scale == 0.0 {
            return None;
        }
        let mut step = [0.0; 2];
        for (l, v) in vals.iter().zip(vecs) {
            if l.abs() > 1e-9 * scale {
                let c = (v[0] * df[0] + v[1] * df[1]) / l;
                step = [step[0] - c * v[0], step[1] - c * v[1]];
            }
        }
        let n = (step[0] * step[0] + step[1] * step[1]).sqrt();
        if n > 0.5 {
            step = step.map(|x| x * 0.5 / n);
        }
        uv = [uv[0] + step[0], uv[1] + step[1]];
        if !(s.chart(chart).reach(uv) < 1.0) {
            return None;
        }
    }
    (s.gradient_norm(chart, uv) < cfg.gradient_tol).then_some(uv)
}

fn positive_first(v: Vec3) -> Vec3 {
    let lead = v.iter().copied().find(|x| x.abs() > 1e-9).unwrap_or(1.0);
    if lead < 0.0 {
        v.map(|x| -x)
    } else {
        v
    }
}

/// Classify a polished zero of the differential.
pub fn critical_point(s: &SurfaceModel, chart: usize, uv: Vec2) -> CriticalPoint {
    let c = s.chart(chart);
    let (vals, vecs) = metric_eigen(c.metric(uv), s.hessian(chart, uv));
    let index = vals.iter().filter(|&&l| l < 0.0).count();
    let mut ev = vecs;
    if index == 2 {
        if ev[0][0] * ev[1][1] - ev[0][1] * ev[1][0] < 0.0 {
            ev[1] = ev[1].map(|x| -x);
        }
    } else {
        for v in ev.iter_mut() {
            *v = c.pull_vector(uv, positive_first(c.push_vector(uv, *v)));
        }
    }
    CriticalPoint {
        chart,
        coords: uv,
        point: c.embed(uv),
        index,
        value: s.value_at(chart, uv),
        gradient_norm: s.gradient_norm(chart, uv),
        eigenvalues: vals,
        eigenvectors: [c.push_vector(uv, ev[0]), c.push_vector(uv, ev[1])],
        orientation: 1,
    }
}

/// All critical points, by grid-seeded Newton iteration in every chart,
/// sorted by value.
pub fn find_critical_points(s: &SurfaceModel, cfg: &EngineConfig) -> Result<Vec<CriticalPoint>, MorseError> {
    let mut found: Vec<CriticalPoint> = Vec::new();
    for (ci, chart) in s.charts().iter().enumerate() {
        let [lo, hi] = chart.seed_box;
        let n = cfg.newton_grid;
        for a in 0..n {
            for b in 0..n {
                let uv = [
                    lo[0] + (hi[0] - lo[0]) * (a as f64 + 0.5) / n as f64,
                    lo[1] + (hi[1] - lo[1]) * (b as f64 + 0.5) / n as f64,
                ];
                let Some(z) = newton(s, ci, uv, cfg) else { continue };
                let p = chart.embed(z);
                let (bc, buv) = s.best_chart(p);
                let Some(z) = newton(s, bc, buv, cfg) else { continue };
                let p = s.chart(bc).embed(z);
                if found.iter().all(|q| dist(q.point, p) > cfg.dedupe_tol) {
                    found.push(critical_point(s, bc, z));
                }
            }
        }
    }
    let degenerate: Vec<&CriticalPoint> =
        found.iter().filter(|p| p.min_abs_eigenvalue() < cfg.degeneracy_tol).collect();
    if let Some(p) = degenerate.first() {
        return Err(MorseError::DegenerateCritical {
            point: p.point,
            eigenvalue: p.min_abs_eigenvalue(),
            count: degenerate.len(),
        });
    }
    found.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(found)
}
