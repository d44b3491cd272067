use std::sync::Arc;

use flowcat_core::{
    identity_morphism, CatLevel, FlowCategoryModel, FlowHomotopyModel, FlowMorphismModel, Generator, IdentityOracle,
    Matrix, PairingKind, PairingOracle,
};
use flowcat_morse::{build_morse_flow_category, morsebott_s2, EngineConfig, MorseCategory, SurfaceModel};
use flowcat_oracles::{CircleVariant, MorseCountOracle, TableEntry, TabulatedOracle, ZeroOracle};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA: u32 = 1;

fn is_false(b: &bool) -> bool {
    !*b
}

fn is_zero(n: &i64) -> bool {
    *n == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub schema: u32,
    pub levels: Vec<LevelDoc>,
    #[serde(default)]
    pub moduli: Vec<ModuliDoc>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub level_differential: bool,
    pub oracle: OracleDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub morphism: Option<MorphismDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homotopy: Option<HomotopyDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle: Option<BundleDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelDoc {
    pub index: i64,
    pub c: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grading: Option<i64>,
    pub generators: Vec<Generator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integration: Option<Matrix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuliDoc {
    pub from: i64,
    pub to: i64,
    pub dim: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountDoc {
    #[serde(default = "category_kind")]
    pub kind: PairingKind,
    pub from: i64,
    pub to: i64,
    pub matrix: Matrix,
}

fn category_kind() -> PairingKind {
    PairingKind::Category
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OracleDoc {
    Counts {
        counts: Vec<CountDoc>,
    },
    Tabulated {
        #[serde(default, skip_serializing_if = "is_false")]
        strict: bool,
        entries: Vec<TableEntry>,
    },
    /// Pairings produced by the Morse engine for a named surface.
    Builtin {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        variant: Option<CircleVariant>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tilt: Option<f64>,
    },
    /// Identity morphism pairings; only valid inside a morphism section.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDoc {
    /// Target category; the enclosing model when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Box<ModelDoc>>,
    pub h: Vec<ModuliDoc>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub degree: i64,
    pub oracle: OracleDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomotopyDoc {
    pub f: MorphismDoc,
    pub g: MorphismDoc,
    pub k: Vec<ModuliDoc>,
    pub oracle: OracleDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BundleDoc {
    Trivial,
    /// Circle bundle over `S²` with Euler class `n·vol`.
    EulerSphere { n: i64 },
}

/// A model together with the optional sections of its document.
#[derive(Clone)]
pub struct Loaded {
    pub model: FlowCategoryModel,
    pub morphism: Option<FlowMorphismModel>,
    pub homotopy: Option<FlowHomotopyModel>,
    pub bundle: Option<BundleDoc>,
    /// Quadrature values before snapping, when the engine computed any.
    pub raw: Vec<(String, f64)>,
}

pub fn parse(text: &str) -> Result<ModelDoc, CliError> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    if doc.schema != SCHEMA {
        return Err(CliError::Parse(format!("unsupported schema {}", doc.schema)));
    }
    Ok(doc)
}

pub fn to_json(doc: &ModelDoc) -> String {
    serde_json::to_string_pretty(doc).expect("documents always serialize")
}

fn bad(e: impl ToString) -> CliError {
    CliError::Parse(e.to_string())
}

fn cat_levels(doc: &ModelDoc) -> Vec<CatLevel> {
    doc.levels
        .iter()
        .map(|l| {
            let level = CatLevel::new(l.index, l.c, l.grading, l.generators.clone());
            match &l.integration {
                Some(m) => level.with_integration(m.clone()),
                None => level,
            }
        })
        .collect()
}

fn moduli(m: &[ModuliDoc]) -> Vec<(i64, i64, i64)> {
    m.iter().map(|d| (d.from, d.to, d.dim)).collect()
}

fn counts_oracle(counts: &[CountDoc]) -> MorseCountOracle {
    let mut o = MorseCountOracle::new();
    for c in counts {
        o.insert(c.kind, c.from, c.to, c.matrix.clone());
    }
    o
}

fn builtin(
    name: &str,
    variant: Option<CircleVariant>,
    tilt: Option<f64>,
    cfg: &EngineConfig,
) -> Result<(FlowCategoryModel, Vec<(String, f64)>), CliError> {
    let engine = |e: flowcat_morse::MorseError| CliError::Engine(e.to_string());
    match name {
        "s2-bott" => {
            let ex = morsebott_s2(variant.unwrap_or_default(), cfg).map_err(engine)?;
            Ok((ex.model, ex.raw.iter().map(|(k, v)| (k.to_string(), *v)).collect()))
        }
        "s2-height" => Ok((build_morse_flow_category(&SurfaceModel::sphere_height(), cfg).map_err(engine)?.model, Vec::new())),
        "t2-tilt" => {
            let t = tilt.unwrap_or(0.1);
            Ok((build_morse_flow_category(&SurfaceModel::torus_tilted(t), cfg).map_err(engine)?.model, Vec::new()))
        }
        other => Err(CliError::Parse(format!("unknown builtin oracle {other:?}"))),
    }
}

fn oracle(o: &OracleDoc, shape: Option<&FlowCategoryModel>) -> Result<Arc<dyn PairingOracle>, CliError> {
    Ok(match o {
        OracleDoc::Counts { counts } => Arc::new(counts_oracle(counts)),
        OracleDoc::Tabulated { strict, entries } => {
            let t = TabulatedOracle::new(entries.clone());
            Arc::new(if *strict { t.strict() } else { t })
        }
        OracleDoc::Identity => match shape {
            Some(fc) => Arc::new(IdentityOracle::new(fc).map_err(bad)?),
            None => return Err(CliError::Parse("identity oracle outside a morphism".into())),
        },
        OracleDoc::Builtin { .. } => return Err(CliError::Parse("builtin oracles only describe categories".into())),
    })
}

fn category(doc: &ModelDoc, cfg: &EngineConfig) -> Result<(FlowCategoryModel, Vec<(String, f64)>), CliError> {
    let declared = FlowCategoryModel::new(cat_levels(doc), moduli(&doc.moduli), Arc::new(ZeroOracle)).map_err(bad)?;
    let (model, raw) = match &doc.oracle {
        OracleDoc::Builtin { name, variant, tilt } => {
            let (model, raw) = builtin(name, *variant, *tilt, cfg)?;
            if !model.same_shape(&declared) {
                return Err(CliError::Parse(format!("levels and moduli do not match builtin {name:?}")));
            }
            (model, raw)
        }
        o => (declared.with_oracle(oracle(o, None)?), Vec::new()),
    };
    Ok((if doc.level_differential { model.with_level_differential() } else { model }, raw))
}

fn morphism(m: &MorphismDoc, source: &FlowCategoryModel, cfg: &EngineConfig) -> Result<FlowMorphismModel, CliError> {
    let target = match &m.target {
        Some(t) => category(t, cfg)?.0,
        None => source.clone(),
    };
    if m.oracle == OracleDoc::Identity && m.target.is_none() && m.degree == 0 {
        let id = identity_morphism(source).map_err(bad)?;
        let dims: Vec<(i64, i64, i64)> = id.dims().iter().map(|(&(i, j), &h)| (i, j, h)).collect();
        if dims != moduli(&m.h) {
            return Err(CliError::Parse("identity morphism dims do not match the category".into()));
        }
        return Ok(id);
    }
    FlowMorphismModel::with_degree(source.clone(), target, moduli(&m.h), m.degree, oracle(&m.oracle, Some(source))?)
        .map_err(bad)
}

pub fn load(doc: &ModelDoc, cfg: &EngineConfig) -> Result<Loaded, CliError> {
    let (model, raw) = category(doc, cfg)?;
    let morphism_model = doc.morphism.as_ref().map(|m| morphism(m, &model, cfg)).transpose()?;
    let homotopy = match &doc.homotopy {
        Some(h) => {
            let f = morphism(&h.f, &model, cfg)?;
            let g = morphism(&h.g, &model, cfg)?;
            Some(FlowHomotopyModel::new(f, g, moduli(&h.k), oracle(&h.oracle, Some(&model))?).map_err(bad)?)
        }
        None => None,
    };
    Ok(Loaded { model, morphism: morphism_model, homotopy, bundle: doc.bundle.clone(), raw })
}

fn level_docs(fc: &FlowCategoryModel) -> Vec<LevelDoc> {
    fc.levels()
        .map(|l| LevelDoc {
            index: l.index,
            c: l.c,
            grading: l.grading,
            generators: l.generators.clone(),
            integration: l.integration.clone(),
        })
        .collect()
}

fn moduli_docs(fc: &FlowCategoryModel) -> Vec<ModuliDoc> {
    fc.moduli().iter().map(|(&(from, to), &dim)| ModuliDoc { from, to, dim }).collect()
}

fn count_docs(o: &MorseCountOracle) -> Vec<CountDoc> {
    o.counts().iter().map(|(&(kind, from, to), m)| CountDoc { kind, from, to, matrix: m.clone() }).collect()
}

/// Document of a Morse category with its rigid counts.
pub fn morse_doc(mc: &MorseCategory) -> ModelDoc {
    ModelDoc {
        schema: SCHEMA,
        levels: level_docs(&mc.model),
        moduli: moduli_docs(&mc.model),
        level_differential: false,
        oracle: OracleDoc::Counts { counts: count_docs(&mc.counts) },
        morphism: None,
        homotopy: None,
        bundle: None,
    }
}

/// Document of a model whose pairings come from the engine.
pub fn builtin_doc(fc: &FlowCategoryModel, name: &str, variant: Option<CircleVariant>) -> ModelDoc {
    ModelDoc {
        schema: SCHEMA,
        levels: level_docs(fc),
        moduli: moduli_docs(fc),
        level_differential: fc.has_level_differential(),
        oracle: OracleDoc::Builtin { name: name.into(), variant, tilt: None },
        morphism: None,
        homotopy: None,
        bundle: None,
    }
}

/// Document of a continuation morphism between two Morse categories.
pub fn continuation_doc(c: &flowcat_morse::Continuation) -> ModelDoc {
    let mut doc = morse_doc(&c.source);
    doc.morphism = Some(MorphismDoc {
        target: Some(Box::new(morse_doc(&c.target))),
        h: c.morphism.dims().iter().map(|(&(from, to), &dim)| ModuliDoc { from, to, dim }).collect(),
        degree: 0,
        oracle: OracleDoc::Counts { counts: count_docs(&c.counts) },
    });
    doc
}
