//! JSON documents for strategies and codes, CSV for tables of numbers.
//!
//! Documents are single-line JSON; counts are plain integers of any size.

use std::str::FromStr;

use anyhow::{anyhow, bail, ensure, Context, Result};
use fbcode_core::bounds::RateRegionPoint;
use fbcode_core::codec::{FeedbackCode, Policy};
use fbcode_core::solver::StrategyTree;
use fbcode_core::{Alphabet, Partition, State};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::Number;

pub const CODE_FORMAT: &str = "fbcode/1";

/// One node of a strategy; leaves carry neither `partition` nor `children`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyDoc {
    pub state: Vec<Number>,
    pub n: usize,
    pub q: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<Vec<Number>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub children: Option<Vec<StrategyDoc>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeKind {
    Strategy,
    Table,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideDoc {
    pub prefix: Vec<u32>,
    pub sets: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeDoc {
    pub format: String,
    pub kind: CodeKind,
    #[serde(rename = "M")]
    pub messages: u64,
    pub e: usize,
    pub q: u32,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<StrategyDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<OverrideDoc>,
}

fn number(v: &BigUint) -> Number {
    Number::from_str(&v.to_string()).expect("decimal digits form a JSON number")
}

fn count(n: &Number) -> Result<BigUint> {
    BigUint::from_str(&n.to_string()).map_err(|_| anyhow!("expected a non-negative integer, got {n}"))
}

fn state_numbers(s: &State) -> Vec<Number> {
    s.counts().iter().map(number).collect()
}

fn numbers_state(v: &[Number]) -> Result<State> {
    Ok(State::new(v.iter().map(count).collect::<Result<_>>()?)?)
}

pub fn strategy_doc(t: &StrategyTree, q: Alphabet) -> StrategyDoc {
    StrategyDoc {
        state: state_numbers(t.state()),
        n: t.remaining(),
        q: q.get(),
        partition: t.partition().map(|p| p.parts().iter().map(state_numbers).collect()),
        children: (!t.is_leaf()).then(|| t.children().iter().map(|c| strategy_doc(c, q)).collect()),
    }
}

pub fn strategy_from_doc(doc: &StrategyDoc) -> Result<(StrategyTree, Alphabet)> {
    let q = Alphabet::new(doc.q)?;
    let state = numbers_state(&doc.state)?;
    let tree = match (&doc.partition, &doc.children) {
        (None, None) => {
            ensure!(doc.n == 0, "leaf with {} questions left", doc.n);
            StrategyTree::leaf(state)
        }
        (Some(parts), Some(children)) => {
            let partition = Partition::new(parts.iter().map(|p| numbers_state(p)).collect::<Result<_>>()?)?;
            let children = children
                .iter()
                .map(|c| {
                    ensure!(c.q == doc.q, "alphabet changes inside the tree");
                    Ok(strategy_from_doc(c)?.0)
                })
                .collect::<Result<Vec<_>>>()?;
            ensure!(!children.is_empty(), "internal node without children");
            let t = StrategyTree::internal(state, partition, children);
            ensure!(t.remaining() == doc.n, "node claims {} questions left, children say {}", doc.n, t.remaining());
            t
        }
        _ => bail!("a node needs both a partition and children, or neither"),
    };
    Ok((tree, q))
}

pub fn strategy_to_json(t: &StrategyTree, q: Alphabet) -> String {
    serde_json::to_string(&strategy_doc(t, q)).expect("strategy documents serialize")
}

pub fn strategy_from_json(text: &str) -> Result<(StrategyTree, Alphabet)> {
    let doc: StrategyDoc = serde_json::from_str(text).context("reading strategy JSON")?;
    strategy_from_doc(&doc)
}

pub fn code_doc(code: &FeedbackCode) -> CodeDoc {
    let q = code.alphabet();
    let (kind, i, strategy) = match code.policy() {
        Policy::Strategy(t) => (CodeKind::Strategy, None, Some(strategy_doc(t, q))),
        Policy::Table(tp) => (CodeKind::Table, Some(tp.offset()), None),
    };
    CodeDoc {
        format: CODE_FORMAT.to_string(),
        kind,
        messages: code.messages(),
        e: code.errors(),
        q: q.get(),
        n: code.block_length(),
        i,
        strategy,
        overrides: code
            .overrides()
            .iter()
            .map(|(prefix, sets)| OverrideDoc {
                prefix: prefix.clone(),
                sets: sets.clone(),
            })
            .collect(),
    }
}

pub fn code_from_doc(doc: &CodeDoc) -> Result<FeedbackCode> {
    ensure!(doc.format == CODE_FORMAT, "unsupported code format {:?}", doc.format);
    let q = Alphabet::new(doc.q)?;
    let mut code = match doc.kind {
        CodeKind::Strategy => {
            let s = doc.strategy.as_ref().ok_or_else(|| anyhow!("strategy code without a strategy"))?;
            let (tree, tq) = strategy_from_doc(s)?;
            ensure!(tq == q, "strategy alphabet {} differs from code alphabet {}", tq, q);
            FeedbackCode::from_strategy(tree, q, doc.messages, doc.e)?
        }
        CodeKind::Table => {
            ensure!(doc.strategy.is_none(), "table code with an embedded strategy");
            let code = FeedbackCode::from_table(doc.messages, doc.e, q)?;
            if let (Some(i), Policy::Table(tp)) = (doc.i, code.policy()) {
                ensure!(i == tp.offset(), "table offset {} does not match the construction ({})", i, tp.offset());
            }
            code
        }
    };
    ensure!(
        code.block_length() == doc.n,
        "code has block length {}, document says {}",
        code.block_length(),
        doc.n
    );
    for o in &doc.overrides {
        code = code.with_override(o.prefix.clone(), o.sets.clone())?;
    }
    Ok(code)
}

pub fn code_to_json(code: &FeedbackCode) -> String {
    serde_json::to_string(&code_doc(code)).expect("code documents serialize")
}

pub fn code_from_json(text: &str) -> Result<FeedbackCode> {
    let doc: CodeDoc = serde_json::from_str(text).context("reading code JSON")?;
    code_from_doc(&doc)
}

pub const RATE_REGION_HEADER: &str = "f,R_volume,R_translation,R_construction";

pub fn rate_region_csv(points: &[RateRegionPoint]) -> String {
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from(RATE_REGION_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.f,
            cell(p.volume),
            cell(p.translation),
            cell(p.construction)
        ));
    }
    out
}

/// Comma-separated symbols, e.g. `2,1,1,0`. Empty input is the empty list.
pub fn parse_symbols(s: &str) -> Result<Vec<u32>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| t.trim().parse::<u32>().with_context(|| format!("bad symbol {t:?}")))
        .collect()
}
