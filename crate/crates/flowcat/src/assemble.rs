use std::collections::BTreeMap;
use std::fmt;

use flowcat_complexes::{ChainMap, GradedComplex, Homotopy};
use flowcat_linalg::{Matrix, Rational};
use flowcat_oracles::{PairingKey, PairingKind, PairingOracle};

use crate::{CatLevel, CompositionModel, FlowCategoryModel, FlowError, FlowHomotopyModel, FlowMorphismModel};

/// One nonzero term of an assembled block, with the sign exponent split into
/// its named summands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub key: PairingKey,
    pub block: (i64, i64),
    pub terms: Vec<(String, i64)>,
    pub value: Rational,
}

impl TraceEntry {
    pub fn exponent(&self) -> i64 {
        self.terms.iter().map(|(_, e)| e).sum()
    }

    pub fn sign(&self) -> i64 {
        if self.exponent().rem_euclid(2) == 0 {
            1
        } else {
            -1
        }
    }
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self.terms.iter().map(|(n, e)| format!("{n}={e}")).collect();
        write!(
            f,
            "block (s={}, k={}) {} value {} sign {:+} exponent {} [{}]",
            self.block.0,
            self.block.1,
            self.key,
            self.value,
            self.sign(),
            self.exponent(),
            terms.join(" + ")
        )
    }
}

/// Assembled object together with its sign trace.
#[derive(Debug, Clone)]
pub struct Assembly<T> {
    pub value: T,
    pub trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone)]
struct Node {
    stage: usize,
    level: i64,
    dim: i64,
    prefix: i64,
    suffix: i64,
}

#[derive(Debug, Clone)]
struct Chain {
    parts: Vec<Vec<i64>>,
    segs: Vec<i64>,
    nodes: Vec<Node>,
}

impl Chain {
    fn inserted_degree(&self) -> i64 {
        self.nodes.iter().map(|n| n.dim - 1).sum()
    }

    fn total(&self) -> i64 {
        self.segs.iter().sum::<i64>() - self.inserted_degree()
    }

    fn stage_nodes(&self, stage: usize) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(move |n| n.stage == stage)
    }
}

/// Categories visited in order, joined by the bimodules between them.
struct Plan<'a> {
    kind: PairingKind,
    stages: Vec<&'a FlowCategoryModel>,
    connectors: Vec<&'a BTreeMap<(i64, i64), i64>>,
}

struct Walk {
    parts: Vec<Vec<i64>>,
    segs: Vec<i64>,
    nodes: Vec<Node>,
    out: Vec<Chain>,
}

impl Walk {
    fn finish(&mut self, t: i64, seg: i64, new_part: bool) {
        if new_part {
            self.parts.push(vec![t]);
        } else {
            self.parts.last_mut().unwrap().push(t);
        }
        self.segs.push(seg);
        let mut chain = Chain { parts: self.parts.clone(), segs: self.segs.clone(), nodes: self.nodes.clone() };
        let total = chain.total();
        for n in &mut chain.nodes {
            n.suffix = total - n.prefix + n.dim - 1;
        }
        self.out.push(chain);
        self.segs.pop();
        if new_part {
            self.parts.pop();
        } else {
            self.parts.last_mut().unwrap().pop();
        }
    }
}

fn outgoing(map: &BTreeMap<(i64, i64), i64>, level: i64) -> Vec<(i64, i64)> {
    map.range((level, i64::MIN)..=(level, i64::MAX)).map(|(&(_, j), &d)| (j, d)).collect()
}

impl<'a> Plan<'a> {
    fn last(&self) -> usize {
        self.stages.len() - 1
    }

    fn chains(&self, s: i64, t: i64) -> Vec<Chain> {
        let mut w = Walk { parts: vec![vec![s]], segs: vec![], nodes: vec![], out: vec![] };
        self.walk(t, 0, s, &mut w);
        w.out
    }

    fn walk(&self, t: i64, stage: usize, level: i64, w: &mut Walk) {
        let last = stage == self.last();
        for (j, m) in outgoing(self.stages[stage].moduli(), level) {
            if last && j == t {
                w.finish(t, m, false);
            } else if !last || j < t {
                self.enter(t, stage, j, m, false, w);
            }
        }
        if !last {
            let next_last = stage + 1 == self.last();
            for (j, x) in outgoing(self.connectors[stage], level) {
                if next_last && j == t {
                    w.finish(t, x, true);
                } else if !next_last || j < t {
                    self.enter(t, stage + 1, j, x, true, w);
                }
            }
        }
    }

    fn enter(&self, t: i64, stage: usize, j: i64, seg: i64, new_part: bool, w: &mut Walk) {
        let Some(level) = self.stages[stage].level(j) else { return };
        // The inserted kernel has degree c − 1, so point levels contribute nothing.
        if level.c == 0 {
            return;
        }
        w.segs.push(seg);
        let prefix = w.segs.iter().sum::<i64>() - w.nodes.iter().map(|n| n.dim - 1).sum::<i64>();
        w.nodes.push(Node { stage, level: j, dim: level.c, prefix, suffix: 0 });
        if new_part {
            w.parts.push(vec![j]);
        } else {
            w.parts.last_mut().unwrap().push(j);
        }
        self.walk(t, stage, j, w);
        if new_part {
            w.parts.pop();
        } else {
            w.parts.last_mut().unwrap().pop();
        }
        w.nodes.pop();
        w.segs.pop();
    }

    /// Summands of the sign exponent for source form degree `a`.
    fn exponent(&self, chain: &Chain, a: i64, cs: i64, ct: i64) -> Vec<(String, i64)> {
        let ddagger = |n: &Node| (format!("‡{}", n.level), (a + n.prefix + 1) * (n.dim + 1));
        let mut e = Vec::new();
        match self.kind {
            PairingKind::Category => {
                e.push(("|α|(c_s+1)".to_string(), a * (cs + 1)));
                e.extend(chain.nodes.iter().map(ddagger));
            }
            PairingKind::Morphism => {
                e.push(("|α|c_s".to_string(), a * cs));
                e.push(("h".to_string(), chain.total()));
                e.extend(chain.nodes.iter().map(ddagger));
                e.push(match chain.stage_nodes(1).next() {
                    Some(j1) => ("d_j1+1+m^D".to_string(), j1.dim + 1 + j1.suffix),
                    None => ("d_t+1+m^D_tt".to_string(), ct + 1 + ct - 1),
                });
            }
            PairingKind::Mixed => {
                e.push(("|α|(c_s+1)".to_string(), a * (cs + 1)));
                e.push(("dim F∘H+1".to_string(), chain.total() - 1 + 1));
                e.extend(chain.stage_nodes(0).map(ddagger));
                if let Some(j1) = chain.stage_nodes(1).next() {
                    e.push(("h_{s,j1}".to_string(), j1.prefix));
                }
                e.extend(chain.stage_nodes(1).map(ddagger));
                e.extend(chain.stage_nodes(2).map(|n| (format!("†{}", n.level), (a + n.prefix - 1) * (n.dim + 1))));
                e.push(match chain.stage_nodes(2).next() {
                    Some(k1) => ("e_k1+m^E+1".to_string(), k1.dim + k1.suffix + 1),
                    None => ("e_t+m^E_tt+1".to_string(), ct + ct - 1 + 1),
                });
            }
            PairingKind::Homotopy => {
                e.push(("|α|(c_s+1)".to_string(), a * (cs + 1)));
                e.push(("k".to_string(), chain.total()));
                e.extend(chain.stage_nodes(0).map(ddagger));
                e.push(match chain.stage_nodes(0).last() {
                    Some(ip) => ("c_ip+m^C+1".to_string(), ip.dim + ip.prefix + 1),
                    None => ("c_s+m^C_ss+1".to_string(), cs + cs - 1 + 1),
                });
                e.extend(chain.stage_nodes(1).map(ddagger));
                e.push(match chain.stage_nodes(1).next() {
                    Some(j1) => ("d_j1+m^D+1".to_string(), j1.dim + j1.suffix + 1),
                    None => ("d_t+m^D_tt+1".to_string(), ct + ct - 1 + 1),
                });
            }
        }
        e
    }

    /// Block `s → t` in coefficients of the target basis.
    fn block(
        &self,
        oracle: &dyn PairingOracle,
        s: i64,
        t: i64,
        trace: &mut Option<Vec<TraceEntry>>,
    ) -> Result<Option<Matrix>, FlowError> {
        let src = self.stages[0].level(s).expect("source level");
        let tgt = self.stages[self.last()].level(t).expect("target level");
        let chains = self.chains(s, t);
        if chains.is_empty() {
            return Ok(None);
        }
        let mut e = Matrix::zeros(tgt.dim(), src.dim());
        for chain in &chains {
            let budget = chain.segs.iter().sum::<i64>() - chain.inserted_degree();
            for (a, ga) in src.generators.iter().enumerate() {
                for (g, gg) in tgt.generators.iter().enumerate() {
                    if ga.degree + gg.degree != budget {
                        continue;
                    }
                    let key = PairingKey::new(self.kind, chain.parts.clone(), a, g);
                    let value = match oracle.pairing(&key)? {
                        Some(v) => v.value,
                        None if self.kind == PairingKind::Mixed => {
                            return Err(FlowError::NotComposable(format!("no mixed pairing for {key}")))
                        }
                        None => return Err(FlowError::OracleMissingPairing(key)),
                    };
                    if value.is_zero() {
                        continue;
                    }
                    let entry = TraceEntry {
                        key,
                        block: (s, t - s),
                        terms: self.exponent(chain, ga.degree, src.c, tgt.c),
                        value,
                    };
                    let signed = &entry.value * &Rational::from(entry.sign());
                    e[(g, a)] = &e[(g, a)] + &signed;
                    if let Some(tr) = trace.as_mut() {
                        tr.push(entry);
                    }
                }
            }
        }
        Ok(Some(&tgt.dual_coordinates()? * &e))
    }

    fn fill(
        &self,
        oracle: &dyn PairingOracle,
        trace: &mut Option<Vec<TraceEntry>>,
        mut set: impl FnMut(i64, i64, Matrix) -> Result<(), FlowError>,
    ) -> Result<(), FlowError> {
        for s in self.stages[0].level_indices() {
            for t in self.stages[self.last()].level_indices() {
                if let Some(b) = self.block(oracle, s, t, trace)? {
                    if !b.is_zero() {
                        set(s, t - s, b)?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn level_differential(
    fc: &FlowCategoryModel,
    l: &CatLevel,
    trace: &mut Option<Vec<TraceEntry>>,
) -> Result<Matrix, FlowError> {
    let mut e = Matrix::zeros(l.dim(), l.dim());
    for (a, ga) in l.generators.iter().enumerate() {
        for (g, gg) in l.generators.iter().enumerate() {
            if ga.degree + 1 + gg.degree != l.c {
                continue;
            }
            let key = PairingKey::category(&[l.index, l.index], a, g);
            let v = fc.oracle().pairing(&key)?.ok_or_else(|| FlowError::OracleMissingPairing(key.clone()))?.value;
            if v.is_zero() {
                continue;
            }
            e[(g, a)] = v.clone();
            if let Some(tr) = trace.as_mut() {
                tr.push(TraceEntry { key, block: (l.index, 0), terms: vec![], value: v });
            }
        }
    }
    Ok(&l.dual_coordinates()? * &e)
}

fn differential(fc: &FlowCategoryModel, trace: &mut Option<Vec<TraceEntry>>) -> Result<GradedComplex, FlowError> {
    let plan = Plan { kind: PairingKind::Category, stages: vec![fc], connectors: vec![] };
    let mut c = fc.empty_complex();
    plan.fill(fc.oracle().as_ref(), trace, |s, k, b| Ok(c.set_block(s, k, b)?))?;
    if fc.has_level_differential() {
        for l in fc.levels() {
            let b = level_differential(fc, l, trace)?;
            if !b.is_zero() {
                c.set_block(l.index, 0, b)?;
            }
        }
    }
    Ok(c)
}

pub fn assemble_differential(fc: &FlowCategoryModel) -> Result<GradedComplex, FlowError> {
    differential(fc, &mut None)
}

pub fn assemble_differential_traced(fc: &FlowCategoryModel) -> Result<Assembly<GradedComplex>, FlowError> {
    let mut trace = Some(Vec::new());
    let value = differential(fc, &mut trace)?;
    Ok(Assembly { value, trace: trace.unwrap() })
}

fn morphism_map(fm: &FlowMorphismModel, trace: &mut Option<Vec<TraceEntry>>) -> Result<ChainMap, FlowError> {
    let src = assemble_differential(fm.source())?;
    let tgt = assemble_differential(fm.target())?;
    let plan = Plan { kind: PairingKind::Morphism, stages: vec![fm.source(), fm.target()], connectors: vec![fm.dims()] };
    let mut map = ChainMap::new(src, tgt);
    plan.fill(fm.oracle().as_ref(), trace, |s, k, b| Ok(map.set_block(s, k, b)?))?;
    Ok(map)
}

pub fn assemble_morphism_map(fm: &FlowMorphismModel) -> Result<ChainMap, FlowError> {
    morphism_map(fm, &mut None)
}

pub fn assemble_morphism_map_traced(fm: &FlowMorphismModel) -> Result<Assembly<ChainMap>, FlowError> {
    let mut trace = Some(Vec::new());
    let value = morphism_map(fm, &mut trace)?;
    Ok(Assembly { value, trace: trace.unwrap() })
}

/// Homotopy from `φ^F∘φ^H` to `φ^{F∘H}` with operator `P`.
pub fn assemble_composition_homotopy(comp: &CompositionModel) -> Result<Homotopy, FlowError> {
    let phi_h = assemble_morphism_map(&comp.h)?;
    let phi_f = assemble_morphism_map(&comp.f)?;
    let phi_fh = assemble_morphism_map(&comp.composite)?;
    let plan = Plan {
        kind: PairingKind::Mixed,
        stages: vec![comp.h.source(), comp.h.target(), comp.f.target()],
        connectors: vec![comp.h.dims(), comp.f.dims()],
    };
    let mut op = ChainMap::new(phi_h.source.clone(), phi_f.target.clone());
    plan.fill(comp.mixed.as_ref(), &mut None, |s, k, b| Ok(op.set_block(s, k, b)?))?;
    Ok(Homotopy::new(phi_f.compose(&phi_h)?, phi_fh, op)?)
}

/// Homotopy from `φ^H` to `φ^F` with operator `Λ^K`.
pub fn assemble_homotopy_operator(k: &FlowHomotopyModel) -> Result<Homotopy, FlowError> {
    let phi_f = assemble_morphism_map(&k.f)?;
    let phi_h = assemble_morphism_map(&k.h)?;
    let plan = Plan { kind: PairingKind::Homotopy, stages: vec![k.f.source(), k.f.target()], connectors: vec![k.dims()] };
    let mut op = ChainMap::new(phi_f.source.clone(), phi_f.target.clone());
    plan.fill(k.oracle().as_ref(), &mut None, |s, kk, b| Ok(op.set_block(s, kk, b)?))?;
    Ok(Homotopy::new(phi_h, phi_f, op)?)
}
