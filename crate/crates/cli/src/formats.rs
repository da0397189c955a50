//! JSON documents read and written by the command-line tool.
//!
//! Every document is built from structs and ordered maps only, so serializing
//! the same value twice yields the same bytes.

use std::collections::BTreeMap;

use favres_core::complexes::{Complex, Entry};
use favres_core::pseudo_rep::{FiniteGroup, Polynomial, Relation, Verdict};
use favres_core::resolution::{Bracket, IterationPlan, Resolution, ResolutionMetadata};
use favres_core::toy_model::{ExactnessReport, StrandFailure};
use favres_core::{Error, Params, Result, Term, Weight};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDoc {
    pub p: u64,
    pub g: usize,
    pub m: u32,
    pub delta_threshold: i64,
}

impl From<&Params> for ParamsDoc {
    fn from(p: &Params) -> Self {
        Self {
            p: p.p,
            g: p.g,
            m: p.m,
            delta_threshold: p.delta_threshold,
        }
    }
}

impl ParamsDoc {
    pub fn to_params(self) -> Result<Params> {
        Params::new(self.p, self.g, self.m, self.delta_threshold)
    }
}

/// A term without its normalization, which the enclosing complex carries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub k: Vec<i64>,
    #[serde(rename = "M")]
    pub orders: Vec<u64>,
}

impl From<&Term> for TermDoc {
    fn from(t: &Term) -> Self {
        Self {
            k: t.weight.k.clone(),
            orders: t.orders.0.clone(),
        }
    }
}

impl TermDoc {
    pub fn to_term(&self, params: &Params, w: i64) -> Result<Term> {
        Term::new(params, Weight::new(self.k.clone(), w), self.orders.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDoc {
    pub params: ParamsDoc,
    pub w: i64,
    /// First and last degree; `[lo, lo - 1]` for the zero complex.
    pub degrees: [i64; 2],
    pub terms: Vec<Vec<TermDoc>>,
    pub differentials: Vec<Vec<Entry>>,
}

impl From<&Complex> for ComplexDoc {
    fn from(c: &Complex) -> Self {
        Self {
            params: (&c.params).into(),
            w: c.w,
            degrees: [c.lo, c.end() - 1],
            terms: c
                .terms
                .iter()
                .map(|ts| ts.iter().map(TermDoc::from).collect())
                .collect(),
            differentials: c.diffs.clone(),
        }
    }
}

impl ComplexDoc {
    pub fn to_complex(&self) -> Result<Complex> {
        let params = self.params.to_params()?;
        let [lo, hi] = self.degrees;
        let len = hi - lo + 1;
        if len < 0 || len as usize != self.terms.len() {
            return Err(Error::MalformedComplex(format!(
                "degrees {lo}..={hi} do not match {} term lists",
                self.terms.len()
            )));
        }
        let ring = params.ring();
        if let Some(e) = self
            .differentials
            .iter()
            .flatten()
            .find(|e| e.alpha >= ring.modulus())
        {
            return Err(Error::MalformedComplex(format!(
                "coefficient {} is not in [0, {})",
                e.alpha,
                ring.modulus()
            )));
        }
        let terms = self
            .terms
            .iter()
            .map(|ts| {
                ts.iter()
                    .map(|t| t.to_term(&params, self.w))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Complex::new(params, self.w, lo, terms, self.differentials.clone())
    }
}

/// A complex with a map from a single source term into its degree 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionDoc {
    pub complex: ComplexDoc,
    pub source: TermDoc,
    pub in_map: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<Vec<IterationPlan>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<ResolutionMetadata>,
    /// Exponent tuple of a single Koszul bracket.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<u64>>,
    /// Index subsets of a single Koszul bracket's summands, per degree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsets: Option<Vec<Vec<Vec<usize>>>>,
}

impl From<&Resolution> for ResolutionDoc {
    fn from(r: &Resolution) -> Self {
        Self {
            complex: (&r.complex).into(),
            source: (&r.source).into(),
            in_map: r.in_map.clone(),
            plan: Some(r.plan.clone()),
            metadata: Some(r.metadata.clone()),
            exponents: None,
            subsets: None,
        }
    }
}

impl From<&Bracket> for ResolutionDoc {
    fn from(b: &Bracket) -> Self {
        Self {
            complex: (&b.complex).into(),
            source: (&b.source).into(),
            in_map: vec![b.in_map()],
            plan: None,
            metadata: None,
            exponents: Some(b.exponents.clone()),
            subsets: Some(b.subsets.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub mode: String,
    pub sweep: String,
    #[serde(rename = "box")]
    pub bx: Vec<i64>,
    pub required_box: Vec<i64>,
    pub strands_checked: usize,
    pub exact: bool,
    pub failures: Vec<StrandFailure>,
}

impl ReportDoc {
    pub fn new(mode: &str, sweep: &str, bx: Vec<i64>, r: ExactnessReport) -> Self {
        Self {
            mode: mode.into(),
            sweep: sweep.into(),
            bx,
            exact: r.is_exact(),
            required_box: r.required_box,
            strands_checked: r.strands_checked,
            failures: r.failures,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDoc {
    pub elements: Vec<String>,
    pub table: Vec<Vec<usize>>,
}

impl From<&FiniteGroup> for GroupDoc {
    fn from(g: &FiniteGroup) -> Self {
        Self {
            elements: g.elements.clone(),
            table: g.table.clone(),
        }
    }
}

impl GroupDoc {
    pub fn to_group(&self) -> Result<FiniteGroup> {
        FiniteGroup::new(self.elements.clone(), self.table.clone())
    }
}

/// Values of a class function, keyed by element name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauDoc {
    pub p: u64,
    pub m: u32,
    pub values: BTreeMap<String, u64>,
}

/// A matrix for every group element, keyed by element name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepDoc {
    pub p: u64,
    pub m: u32,
    pub matrices: BTreeMap<String, Vec<Vec<u64>>>,
}

/// Hecke eigenvalues at primes and the group element each prime's Frobenius maps to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeckeDoc {
    pub p: u64,
    pub m: u32,
    pub labels: BTreeMap<String, String>,
    pub eigenvalues: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictDoc {
    pub p: u64,
    pub m: u32,
    pub d: usize,
    pub values: BTreeMap<String, u64>,
    pub verdict: Verdict,
    /// Witness tuples of the verdict, by element name.
    pub witness: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialDoc {
    pub vars: Vec<String>,
    pub coeff: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDoc {
    pub kind: String,
    pub args: Vec<String>,
    pub poly: Vec<MonomialDoc>,
    pub text: String,
    /// The relation after substituting `t_1 = 2`.
    pub reduced: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationsDoc {
    pub elements: Vec<String>,
    pub relations: Vec<RelationDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub all_zero: Option<bool>,
}

fn ordered(p: &Polynomial) -> Vec<(&Vec<usize>, i64)> {
    let mut terms: Vec<_> = p.iter().map(|(m, &c)| (m, c)).collect();
    terms.sort_by(|a, b| (b.0.len(), a.0).cmp(&(a.0.len(), b.0)));
    terms
}

/// Human-readable form, highest degree first, e.g. `t_g^3 - 4*t_g`.
pub fn render(p: &Polynomial, names: &[String]) -> String {
    let terms = ordered(p);
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (mono, c)) in terms.into_iter().enumerate() {
        let sign = if c < 0 { "-" } else { "+" };
        if i == 0 {
            if c < 0 {
                out.push('-');
            }
        } else {
            out.push_str(&format!(" {sign} "));
        }
        let mut factors: Vec<String> = Vec::new();
        let mut j = 0;
        while j < mono.len() {
            let run = mono[j..].iter().take_while(|&&v| v == mono[j]).count();
            let base = format!("t_{}", names[mono[j]]);
            factors.push(if run > 1 {
                format!("{base}^{run}")
            } else {
                base
            });
            j += run;
        }
        let a = c.unsigned_abs();
        match (a, factors.is_empty()) {
            (_, true) => out.push_str(&a.to_string()),
            (1, false) => out.push_str(&factors.join("*")),
            _ => out.push_str(&format!("{a}*{}", factors.join("*"))),
        }
    }
    out
}

pub fn relation_doc(r: &Relation, reduced: &Polynomial, names: &[String]) -> RelationDoc {
    RelationDoc {
        kind: r.kind.clone(),
        args: r.args.iter().map(|&a| names[a].clone()).collect(),
        poly: ordered(&r.poly)
            .into_iter()
            .map(|(m, c)| MonomialDoc {
                vars: m.iter().map(|&v| names[v].clone()).collect(),
                coeff: c,
            })
            .collect(),
        text: render(&r.poly, names),
        reduced: render(reduced, names),
        residual: None,
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(x: &T) -> String {
    let mut s = serde_json::to_string_pretty(x).expect("documents serialize");
    s.push('\n');
    s
}
