//! Versioned JSON persistence of an assembled algebra. All scalars are
//! exact: rationals as `"p/q"` strings, surds as radicand/coefficient
//! records.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{GkmError, Result};
use crate::gkm::{Generator, GkmAlgebra};
use crate::liealg::{BaseKind, FiniteAlgebra, StructureTensor};
use crate::modes::{Expansion, Manifold, ModeLabel, ModeSystem};
use crate::scalar::{format_rational, parse_rational, ComplexSurd, Rational, SurdScalar};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureEntry {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub value: SurdScalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseBlock {
    pub name: String,
    pub dim: usize,
    /// Nonzero `f_ab^c`, one-based.
    pub structure_constants: Vec<StructureEntry>,
    pub metric: Vec<Vec<SurdScalar>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductTerm {
    pub k: ModeLabel,
    pub value: SurdScalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductEntry {
    pub i: ModeLabel,
    pub j: ModeLabel,
    pub terms: Vec<ProductTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaEntry {
    pub mode: ModeLabel,
    pub partner: ModeLabel,
    pub phase: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenEntry {
    pub mode: ModeLabel,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeBlock {
    pub manifold: Manifold,
    pub cutoff: u32,
    pub r: usize,
    pub modes: Vec<ModeLabel>,
    pub products: Vec<ProductEntry>,
    pub eta: Vec<EtaEntry>,
    pub eigen: Vec<EigenEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KillingBlock {
    /// `⟨D_i, k_i⟩`.
    pub d_k_pairing: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketTerm {
    pub generator: Generator,
    pub value: ComplexSurd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketEntry {
    pub x: Generator,
    pub y: Generator,
    pub terms: Vec<BracketTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub parameters: BTreeMap<String, String>,
    pub created: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraDumpV1 {
    pub schema_version: u32,
    pub base: BaseBlock,
    pub modes: ModeBlock,
    pub charges: Vec<String>,
    pub killing: KillingBlock,
    pub generators: Vec<Generator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub brackets: Option<Vec<BracketEntry>>,
    pub provenance: Provenance,
}

fn parse_all(xs: &[String]) -> Result<Vec<Rational>> {
    xs.iter().map(|s| parse_rational(s)).collect()
}

impl AlgebraDumpV1 {
    /// Snapshot of `alg`. With `brackets`, the nonzero brackets of all
    /// ordered generator pairs are included.
    pub fn from_algebra(alg: &GkmAlgebra, brackets: bool, provenance: Provenance) -> Self {
        let base = &alg.base;
        let mut structure_constants = Vec::new();
        for a in 0..base.dim {
            for b in 0..base.dim {
                if let Some(row) = base.f_row(a, b) {
                    for (c, v) in row {
                        if !v.is_zero() {
                            structure_constants.push(StructureEntry { a: a + 1, b: b + 1, c: c + 1, value: v.clone() });
                        }
                    }
                }
            }
        }
        let m = &alg.modes;
        let mut products: Vec<ProductEntry> = m
            .product_table()
            .into_iter()
            .map(|((i, j), e)| ProductEntry {
                i: i.clone(),
                j: j.clone(),
                terms: e.iter().map(|(k, v)| ProductTerm { k: k.clone(), value: v.clone() }).collect(),
            })
            .collect();
        products.sort_by(|x, y| (&x.i, &x.j).cmp(&(&y.i, &y.j)));
        let eta = m
            .eta_table()
            .iter()
            .map(|(mode, (partner, phase))| EtaEntry { mode: mode.clone(), partner: partner.clone(), phase: *phase })
            .collect();
        let eigen = m
            .eigen_table()
            .iter()
            .map(|(mode, v)| EigenEntry { mode: mode.clone(), values: v.iter().map(format_rational).collect() })
            .collect();
        let brackets = brackets.then(|| {
            let g = alg.generators();
            let mut out = Vec::new();
            for x in g {
                for y in g {
                    let b = alg.bracket_generators(x, y);
                    if !b.is_zero() {
                        let terms =
                            b.terms().map(|(gen, v)| BracketTerm { generator: gen.clone(), value: v.clone() }).collect();
                        out.push(BracketEntry { x: x.clone(), y: y.clone(), terms });
                    }
                }
            }
            out
        });
        Self {
            schema_version: SCHEMA_VERSION,
            base: BaseBlock {
                name: base.name(),
                dim: base.dim,
                structure_constants,
                metric: base.metric().to_vec(),
            },
            modes: ModeBlock {
                manifold: *m.manifold(),
                cutoff: m.cutoff(),
                r: m.rank(),
                modes: m.modes().to_vec(),
                products,
                eta,
                eigen,
            },
            charges: alg.charges.iter().map(format_rational).collect(),
            killing: KillingBlock { d_k_pairing: format_rational(&alg.dk_pairing) },
            generators: alg.generators().to_vec(),
            brackets,
            provenance,
        }
    }

    /// Rebuilds the algebra from the stored tables, without recomputing
    /// them, so tampered tables survive loading and are caught by the
    /// verification suites.
    pub fn to_algebra(&self) -> Result<GkmAlgebra> {
        let kind = BaseKind::parse(&self.base.name)?;
        let dim = self.base.dim;
        if self.base.metric.len() != dim || self.base.metric.iter().any(|row| row.len() != dim) {
            return Err(GkmError::Parse(format!("metric is not {dim}×{dim}")));
        }
        let mut f = StructureTensor::new();
        for e in &self.base.structure_constants {
            if e.a == 0 || e.b == 0 || e.c == 0 || e.a > dim || e.b > dim || e.c > dim {
                return Err(GkmError::Parse(format!("structure constant index out of range: {:?}", (e.a, e.b, e.c))));
            }
            f.entry((e.a - 1, e.b - 1)).or_default().insert(e.c - 1, e.value.clone());
        }
        let base = FiniteAlgebra::from_parts(kind, dim, f, self.base.metric.clone());

        let mb = &self.modes;
        if mb.r != mb.manifold.rank() {
            return Err(GkmError::Parse(format!("r = {} but {} has rank {}", mb.r, mb.manifold, mb.manifold.rank())));
        }
        let mut products = HashMap::new();
        for p in &mb.products {
            let e: Expansion = p.terms.iter().map(|t| (t.k.clone(), t.value.clone())).collect();
            products.insert((p.i.clone(), p.j.clone()), e);
        }
        let eta = mb.eta.iter().map(|e| (e.mode.clone(), (e.partner.clone(), e.phase))).collect();
        let eigen = mb
            .eigen
            .iter()
            .map(|e| Ok((e.mode.clone(), parse_all(&e.values)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let modes = ModeSystem::from_tables(mb.manifold, mb.cutoff, products, eta, eigen)?;
        if modes.modes() != mb.modes.as_slice() {
            return Err(GkmError::Parse("mode list does not match manifold and cutoff".into()));
        }
        let mut alg = GkmAlgebra::assemble(base, modes, parse_all(&self.charges)?)?;
        alg.dk_pairing = parse_rational(&self.killing.d_k_pairing)?;
        Ok(alg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses a dump, rejecting any schema version other than 1.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let version = value
            .get("schema_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| GkmError::Parse("missing schema_version".into()))?;
        if version != SCHEMA_VERSION as u64 {
            return Err(GkmError::SchemaVersion(version as u32));
        }
        Ok(serde_json::from_value(value)?)
    }
}
