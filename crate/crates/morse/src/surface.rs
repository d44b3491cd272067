use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

pub type Vec2 = [f64; 2];
pub type Vec3 = [f64; 3];

type Map<A, B> = Arc<dyn Fn(A) -> B + Send + Sync>;

pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dist(a: Vec3, b: Vec3) -> f64 {
    dot(sub(a, b), sub(a, b)).sqrt()
}

/// A parametrization of part of the surface with its Jacobian and inverse.
/// Every chart of an atlas is positively oriented.
#[derive(Clone)]
pub struct SurfaceChart {
    pub name: String,
    embed: Map<Vec2, Vec3>,
    jacobian: Map<Vec2, [Vec3; 2]>,
    locate: Map<Vec3, Vec2>,
    reach: Map<Vec2, f64>,
    /// Box sampled when seeding Newton's method.
    pub seed_box: [Vec2; 2],
}

impl SurfaceChart {
    pub fn new(
        name: impl Into<String>,
        embed: impl Fn(Vec2) -> Vec3 + Send + Sync + 'static,
        jacobian: impl Fn(Vec2) -> [Vec3; 2] + Send + Sync + 'static,
        locate: impl Fn(Vec3) -> Vec2 + Send + Sync + 'static,
        reach: impl Fn(Vec2) -> f64 + Send + Sync + 'static,
        seed_box: [Vec2; 2],
    ) -> Self {
        SurfaceChart {
            name: name.into(),
            embed: Arc::new(embed),
            jacobian: Arc::new(jacobian),
            locate: Arc::new(locate),
            reach: Arc::new(reach),
            seed_box,
        }
    }

    pub fn embed(&self, uv: Vec2) -> Vec3 {
        (self.embed)(uv)
    }

    pub fn jacobian(&self, uv: Vec2) -> [Vec3; 2] {
        (self.jacobian)(uv)
    }

    pub fn locate(&self, p: Vec3) -> Vec2 {
        (self.locate)(p)
    }

    /// Below 1 inside the part of the chart used for computation; smaller
    /// values are preferred when charts overlap.
    pub fn reach(&self, uv: Vec2) -> f64 {
        let r = (self.reach)(uv);
        if r.is_finite() {
            r
        } else {
            f64::INFINITY
        }
    }

    pub fn metric(&self, uv: Vec2) -> [[f64; 2]; 2] {
        let [ju, jv] = self.jacobian(uv);
        let off = dot(ju, jv);
        [[dot(ju, ju), off], [off, dot(jv, jv)]]
    }

    /// Chart coordinates of an ambient tangent vector.
    pub fn pull_vector(&self, uv: Vec2, v: Vec3) -> Vec2 {
        let [ju, jv] = self.jacobian(uv);
        solve2(self.metric(uv), [dot(ju, v), dot(jv, v)])
    }

    pub fn push_vector(&self, uv: Vec2, w: Vec2) -> Vec3 {
        let [ju, jv] = self.jacobian(uv);
        [0, 1, 2].map(|i| ju[i] * w[0] + jv[i] * w[1])
    }
}

impl fmt::Debug for SurfaceChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfaceChart").field("name", &self.name).finish()
    }
}

pub(crate) fn solve2(a: [[f64; 2]; 2], b: Vec2) -> Vec2 {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    [(a[1][1] * b[0] - a[0][1] * b[1]) / det, (a[0][0] * b[1] - a[1][0] * b[0]) / det]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Sphere,
    Torus,
}

impl Topology {
    pub fn betti(&self) -> Vec<usize> {
        match self {
            Topology::Sphere => vec![1, 0, 1],
            Topology::Torus => vec![1, 2, 1],
        }
    }
}

/// A closed embedded surface with a function given on the ambient space.
#[derive(Clone)]
pub struct SurfaceModel {
    pub name: String,
    pub topology: Topology,
    charts: Vec<SurfaceChart>,
    value: Map<Vec3, f64>,
    gradient: Map<Vec3, Vec3>,
    /// The engine may fall back to the built-in Morse-Bott model.
    pub morse_bott_builtin: bool,
}

impl fmt::Debug for SurfaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfaceModel").field("name", &self.name).field("charts", &self.charts).finish()
    }
}

impl SurfaceModel {
    pub fn new(
        name: impl Into<String>,
        topology: Topology,
        charts: Vec<SurfaceChart>,
        value: impl Fn(Vec3) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(Vec3) -> Vec3 + Send + Sync + 'static,
    ) -> Self {
        SurfaceModel {
            name: name.into(),
            topology,
            charts,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            morse_bott_builtin: false,
        }
    }

    /// Height `z` on the unit sphere.
    pub fn sphere_height() -> Self {
        Self::sphere_tilted_height(0.0)
    }

    /// Height along `(sin a, 0, cos a)` on the unit sphere.
    pub fn sphere_tilted_height(a: f64) -> Self {
        let n = [a.sin(), 0.0, a.cos()];
        let name = if a == 0.0 { "sphere-height".to_string() } else { format!("sphere-height-{a}") };
        SurfaceModel::new(name, Topology::Sphere, sphere_atlas(), move |p| dot(n, p), move |_| n)
    }

    pub fn sphere_height_squared() -> Self {
        let mut s = SurfaceModel::new(
            "sphere-height-squared",
            Topology::Sphere,
            sphere_atlas(),
            |p| p[2] * p[2],
            |p| [0.0, 0.0, 2.0 * p[2]],
        );
        s.morse_bott_builtin = true;
        s
    }

    pub fn sphere_constant() -> Self {
        SurfaceModel::new("sphere-constant", Topology::Sphere, sphere_atlas(), |_| 0.0, |_| [0.0; 3])
    }

    /// The standing torus with radii 2 and 1, height `x cos t + z sin t`.
    pub fn torus_tilted(t: f64) -> Self {
        let n = [t.cos(), 0.0, t.sin()];
        SurfaceModel::new(format!("torus-tilt-{t}"), Topology::Torus, torus_atlas(2.0, 1.0), move |p| dot(n, p), move |_| n)
    }

    pub fn charts(&self) -> &[SurfaceChart] {
        &self.charts
    }

    pub fn chart(&self, i: usize) -> &SurfaceChart {
        &self.charts[i]
    }

    pub fn value(&self, p: Vec3) -> f64 {
        (self.value)(p)
    }

    /// Chart whose reach at `p` is smallest.
    pub fn best_chart(&self, p: Vec3) -> (usize, Vec2) {
        self.charts
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.locate(p)))
            .min_by(|a, b| self.charts[a.0].reach(a.1).total_cmp(&self.charts[b.0].reach(b.1)))
            .expect("atlas is nonempty")
    }

    pub fn value_at(&self, chart: usize, uv: Vec2) -> f64 {
        self.value(self.charts[chart].embed(uv))
    }

    /// Differential of `f` in chart coordinates.
    pub fn differential(&self, chart: usize, uv: Vec2) -> Vec2 {
        let c = &self.charts[chart];
        let grad = (self.gradient)(c.embed(uv));
        let [ju, jv] = c.jacobian(uv);
        [dot(grad, ju), dot(grad, jv)]
    }

    /// Metric gradient in chart coordinates.
    pub fn gradient(&self, chart: usize, uv: Vec2) -> Vec2 {
        solve2(self.charts[chart].metric(uv), self.differential(chart, uv))
    }

    pub fn gradient_norm(&self, chart: usize, uv: Vec2) -> f64 {
        let df = self.differential(chart, uv);
        let g = self.gradient(chart, uv);
        (df[0] * g[0] + df[1] * g[1]).max(0.0).sqrt()
    }

    /// Hessian of `f` in chart coordinates by central differences of the
    /// differential. At a critical point this is the covariant Hessian.
    pub fn hessian(&self, chart: usize, uv: Vec2) -> [[f64; 2]; 2] {
        let h = 1e-5;
        let mut m = [[0.0; 2]; 2];
        for k in 0..2 {
            let mut a = uv;
            let mut b = uv;
            a[k] += h;
            b[k] -= h;
            let (da, db) = (self.differential(chart, a), self.differential(chart, b));
            for i in 0..2 {
                m[i][k] = (da[i] - db[i]) / (2.0 * h);
            }
        }
        let off = 0.5 * (m[0][1] + m[1][0]);
        [[m[0][0], off], [off, m[1][1]]]
    }
}

/// Stereographic charts. `s = 1` projects from the north pole and covers the
/// south, `s = −1` the reverse; the sign `σ = −s` on the second coordinate
/// makes both positively oriented.
pub fn sphere_atlas() -> Vec<SurfaceChart> {
    let reach = |w: Vec2| (w[0] * w[0] + w[1] * w[1]).sqrt() / 1.5;
    let bx = [[-1.4, -1.4], [1.4, 1.4]];
    let chart = |name: &str, s: f64| {
        let sg = -s;
        SurfaceChart::new(
            name,
            move |w: Vec2| {
                let q = 1.0 + w[0] * w[0] + w[1] * w[1];
                [2.0 * w[0] / q, 2.0 * sg * w[1] / q, s * (1.0 - 2.0 / q)]
            },
            move |w: Vec2| {
                let q = 1.0 + w[0] * w[0] + w[1] * w[1];
                let q2 = q * q;
                [
                    [2.0 / q - 4.0 * w[0] * w[0] / q2, -4.0 * sg * w[0] * w[1] / q2, 4.0 * s * w[0] / q2],
                    [-4.0 * w[0] * w[1] / q2, sg * (2.0 / q - 4.0 * w[1] * w[1] / q2), 4.0 * s * w[1] / q2],
                ]
            },
            move |p: Vec3| {
                let d = 1.0 - s * p[2];
                [p[0] / d, sg * p[1] / d]
            },
            reach,
            bx,
        )
    };
    vec![chart("south", 1.0), chart("north", -1.0)]
}

/// Angle chart of the torus of revolution about the z axis, tipped so that
/// the symmetry axis is y.
pub fn torus_atlas(big: f64, small: f64) -> Vec<SurfaceChart> {
    vec![SurfaceChart::new(
        "angles",
        move |[u, v]: Vec2| {
            let r = big + small * v.cos();
            [r * u.cos(), r * u.sin(), small * v.sin()]
        },
        move |[u, v]: Vec2| {
            let r = big + small * v.cos();
            [[-r * u.sin(), r * u.cos(), 0.0], [-small * v.sin() * u.cos(), -small * v.sin() * u.sin(), small * v.cos()]]
        },
        move |p: Vec3| {
            let u = p[1].atan2(p[0]);
            let v = p[2].atan2((p[0] * p[0] + p[1] * p[1]).sqrt() - big);
            [u.rem_euclid(TAU), v.rem_euclid(TAU)]
        },
        |_| 0.0,
        [[0.0, 0.0], [TAU, TAU]],
    )]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cross(a: Vec3, b: Vec3) -> Vec3 {
        [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
    }

    #[test]
    fn sphere_charts_invert_and_orient() {
        for c in sphere_atlas() {
            for w in [[0.3, -0.2], [0.0, 0.0], [-1.1, 0.7]] {
                let p = c.embed(w);
                assert!((dot(p, p) - 1.0).abs() < 1e-14);
                let back = c.locate(p);
                assert!((back[0] - w[0]).abs() < 1e-12 && (back[1] - w[1]).abs() < 1e-12);
                let [ju, jv] = c.jacobian(w);
                assert!(dot(cross(ju, jv), p) > 0.0, "{} at {w:?}", c.name);
            }
        }
    }

    #[test]
    fn jacobians_match_differences() {
        let mut charts = sphere_atlas();
        charts.extend(torus_atlas(2.0, 1.0));
        for c in &charts {
            let w = [0.4, 0.9];
            let j = c.jacobian(w);
            for k in 0..2 {
                let mut a = w;
                let mut b = w;
                a[k] += 1e-6;
                b[k] -= 1e-6;
                let fd = sub(c.embed(a), c.embed(b)).map(|x| x / 2e-6);
                assert!(dist(fd, j[k]) < 1e-8, "{}", c.name);
            }
        }
    }

    #[test]
    fn torus_orientation_is_outward() {
        let c = &torus_atlas(2.0, 1.0)[0];
        for uv in [[0.0, 0.0], [1.0, 2.5], [4.0, 5.0]] {
            let p = c.embed(uv);
            let center = [2.0 * uv[0].cos(), 2.0 * uv[0].sin(), 0.0];
            let [ju, jv] = c.jacobian(uv);
            assert!(dot(cross(ju, jv), sub(p, center)) > 0.0);
            let back = c.locate(p);
            assert!((back[0] - uv[0]).abs() < 1e-12 && (back[1] - uv[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn best_chart_avoids_the_projection_pole() {
        let s = SurfaceModel::sphere_height();
        let (i, _) = s.best_chart([0.0, 0.0, 1.0]);
        assert_eq!(s.chart(i).name, "north");
    }
}
