use std::f64::consts::TAU;
use std::sync::Arc;

use flowcat_core::{CatLevel, FlowCategoryModel, Generator, Matrix, PairingKey, PairingKind, Rational};
use flowcat_oracles::{Chart, CircleDefiningData, CircleVariant, MorseCountOracle, QuadratureOracle};

use crate::critical::{critical_point, find_critical_points, CriticalPoint};
use crate::flow::{shoot_from, FlowLine, Tracer};
use crate::surface::{SurfaceModel, Topology};
use crate::{EngineConfig, MorseError};

/// A Morse flow category together with the geometry that produced it.
#[derive(Debug, Clone)]
pub struct MorseCategory {
    pub critical: Vec<CriticalPoint>,
    /// Critical point indices on each level, lowest value first.
    pub levels: Vec<Vec<usize>>,
    pub lines: Vec<FlowLine>,
    pub model: FlowCategoryModel,
    pub counts: MorseCountOracle,
}

impl MorseCategory {
    pub fn level_of(&self, p: usize) -> (usize, usize) {
        self.levels
            .iter()
            .enumerate()
            .find_map(|(l, pts)| pts.iter().position(|&q| q == p).map(|k| (l, k)))
            .expect("every critical point lies on a level")
    }
}

fn group_levels(crit: &[CriticalPoint]) -> Result<Vec<Vec<usize>>, MorseError> {
    let mut levels: Vec<Vec<usize>> = Vec::new();
    for (i, p) in crit.iter().enumerate() {
        match levels.last_mut() {
            Some(l) if (crit[l[0]].value - p.value).abs() < 1e-9 => {
                if crit[l[0]].index != p.index {
                    return Err(MorseError::MixedLevel(p.point));
                }
                l.push(i);
            }
            _ => levels.push(vec![i]),
        }
    }
    Ok(levels)
}

pub fn build_morse_flow_category(s: &SurfaceModel, cfg: &EngineConfig) -> Result<MorseCategory, MorseError> {
    let critical = find_critical_points(s, cfg)?;
    let levels = group_levels(&critical)?;
    let level_of = |p: usize| {
        levels.iter().enumerate().find_map(|(l, pts)| pts.iter().position(|&q| q == p).map(|k| (l, k))).unwrap()
    };
    let cat_levels: Vec<CatLevel> = levels
        .iter()
        .enumerate()
        .map(|(l, pts)| {
            let labels: Vec<String> = pts.iter().map(|p| format!("x{p}")).collect();
            let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
            CatLevel::points(l as i64, Some(critical[pts[0]].index as i64), &refs)
        })
        .collect();
    let mut moduli = Vec::new();
    for i in 0..levels.len() {
        for j in i + 1..levels.len() {
            let m = critical[levels[j][0]].index as i64 - critical[levels[i][0]].index as i64 - 1;
            if m >= 0 {
                moduli.push((i as i64, j as i64, m));
            }
        }
    }
    let mut counts = MorseCountOracle::new();
    let mut lines = Vec::new();
    for p in 0..critical.len() {
        for line in shoot_from(s, &critical, p, cfg)? {
            if !line.energy_bound_holds(critical[line.to].value - critical[p].value) {
                return Err(MorseError::EnergyBound { from: critical[p].point });
            }
            let ((li, ki), (lj, kj)) = (level_of(p), level_of(line.to));
            let (i, j) = (li as i64, lj as i64);
            let mut m = counts
                .count(PairingKind::Category, i, j)
                .cloned()
                .unwrap_or_else(|| Matrix::zeros(levels[lj].len(), levels[li].len()));
            m[(kj, ki)] = &m[(kj, ki)] + &Rational::from(line.sign);
            counts.insert(PairingKind::Category, i, j, m);
            lines.push(line);
        }
    }
    let model = FlowCategoryModel::new(cat_levels, moduli, Arc::new(counts.clone()))?;
    Ok(MorseCategory { critical, levels, lines, model, counts })
}

fn de_rham_level(t: Topology) -> CatLevel {
    match t {
        Topology::Sphere => CatLevel::new(0, 2, Some(0), vec![Generator::new("1", 0), Generator::new("vol", 2)]),
        Topology::Torus => CatLevel::new(
            0,
            2,
            Some(0),
            vec![Generator::new("1", 0), Generator::new("a", 1), Generator::new("b", 1), Generator::new("vol", 2)],
        )
        .with_integration(Matrix::from_i64(&[&[0, 0, 0, 1], &[0, 0, 1, 0], &[0, -1, 0, 0], &[1, 0, 0, 0]])),
    }
}

/// Single level carrying the de Rham cohomology of the surface, for a
/// constant function.
pub fn build_constant_flow_category(s: &SurfaceModel) -> Result<FlowCategoryModel, MorseError> {
    if !is_constant(s) {
        return Err(MorseError::Unsupported(format!("{} is not constant", s.name)));
    }
    Ok(FlowCategoryModel::new(vec![de_rham_level(s.topology)], [], Arc::new(flowcat_oracles::ZeroOracle))?)
}

fn is_constant(s: &SurfaceModel) -> bool {
    s.charts().iter().enumerate().all(|(ci, c)| {
        let [lo, hi] = c.seed_box;
        (0..8).all(|a| {
            (0..8).all(|b| {
                let uv = [lo[0] + (hi[0] - lo[0]) * a as f64 / 7.0, lo[1] + (hi[1] - lo[1]) * b as f64 / 7.0];
                s.gradient_norm(ci, uv) < 1e-12
            })
        })
    })
}

/// The Morse-Bott model of `z²` on the sphere and the data behind it.
#[derive(Debug, Clone)]
pub struct MorseBottExample {
    pub model: FlowCategoryModel,
    pub circle: CircleDefiningData,
    pub quadrature: Arc<QuadratureOracle>,
    /// Orientation sign of the moduli component ending at N and at S.
    pub pole_signs: [i64; 2],
    /// Unsnapped quadrature values of the leading pairings.
    pub raw: Vec<(PairingKey, f64)>,
}

/// Which pole a flow line leaving the equator in direction `±∂z` reaches.
fn pole_signs(cfg: &EngineConfig) -> Result<[i64; 2], MorseError> {
    let s = SurfaceModel::sphere_height_squared();
    let poles: Vec<CriticalPoint> = [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]
        .iter()
        .map(|&p| {
            let (ci, uv) = s.best_chart(p);
            critical_point(&s, ci, uv)
        })
        .collect();
    let tracer = Tracer { s: &s, crit: &poles, cfg, record: false, dir: 1.0 };
    let mut signs = [0; 2];
    for sigma in [1.0, -1.0] {
        let z: f64 = sigma * 0.05;
        let r = (1.0 - z * z).sqrt();
        let start = [r * 0.3f64.cos(), r * 0.3f64.sin(), z];
        let t = tracer.trace(usize::MAX, start, &[])?;
        signs[t.end] = sigma as i64;
    }
    if signs.contains(&0) {
        return Err(MorseError::Unsupported("both equator branches reached one pole".into()));
    }
    Ok(signs)
}

pub fn morsebott_s2(variant: CircleVariant, cfg: &EngineConfig) -> Result<MorseBottExample, MorseError> {
    let circle = CircleDefiningData::new(variant);
    let pole_signs = pole_signs(cfg)?;
    let mut q = QuadratureOracle::new();
    for (g, &sign) in pole_signs.iter().enumerate() {
        q.register(PairingKey::category(&[0, 1], 1, g), Chart::new(1, 1, move |x| sign as f64 * circle.omega(TAU * x[0])));
        q.register(PairingKey::category(&[0, 1], 0, g), Chart::new(1, 0, |_| 1.0));
    }
    let mut raw = Vec::new();
    for g in 0..2 {
        let key = PairingKey::category(&[0, 1], 1, g);
        let value = q.evaluate(&key).map_err(flowcat_core::FlowError::from)?.map_or(f64::NAN, |r| r.raw);
        if !((value.abs() - 1.0).abs() < cfg.quadrature_tol) {
            return Err(MorseError::BadQuadrature { key: key.to_string(), value });
        }
        raw.push((key, value));
    }
    let quadrature = Arc::new(q);
    let levels = vec![
        CatLevel::new(0, 1, Some(0), vec![Generator::new("1", 0), Generator::new("ω", 1)]),
        CatLevel::points(1, Some(2), &["N", "S"]),
    ];
    let model = FlowCategoryModel::new(levels, [(0, 1, 1)], quadrature.clone())?;
    Ok(MorseBottExample { model, circle, quadrature, pole_signs, raw })
}

pub fn build_morsebott_s2_example() -> Result<FlowCategoryModel, MorseError> {
    Ok(morsebott_s2(CircleVariant::A, &EngineConfig::default())?.model)
}

/// Flow category of any built-in surface: constant, Morse, or the `z²`
/// Morse-Bott model when its degenerate critical set is detected.
pub fn build_category(s: &SurfaceModel, cfg: &EngineConfig) -> Result<FlowCategoryModel, MorseError> {
    if is_constant(s) {
        return build_constant_flow_category(s);
    }
    match build_morse_flow_category(s, cfg) {
        Ok(mc) => Ok(mc.model),
        Err(MorseError::DegenerateCritical { .. }) if s.morse_bott_builtin => Ok(morsebott_s2(CircleVariant::A, cfg)?.model),
        Err(e) => Err(e),
    }
}
