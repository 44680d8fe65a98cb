//! Enumeration of small finite structures.
//!
//! Domains of size 1 and 2 are searched exhaustively. Formulas that only
//! mention betweenness are used to filter betweenness tables on their own,
//! and likewise for congruence, so only surviving pairs of tables reach the
//! formulas that mention both. Size 3 is sampled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::finite::{compile, Compiled, Structure};
use super::{FiniteModel, ModelError};
use crate::axioms::NamedFormula;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    /// Exhaustive up to size 2, then `samples` random table pairs at size 3.
    Sampled { samples: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub mode: SearchMode,
    /// Table pairs checked per domain size before giving up.
    pub max_pairs: u64,
    /// Models kept in the result; the rest are only counted.
    pub max_models: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            mode: SearchMode::Exhaustive,
            max_pairs: 50_000_000,
            max_models: 1000,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SizeStats {
    pub size: usize,
    pub sampled: bool,
    pub b_tables: u64,
    pub b_kept: u64,
    pub d_tables: u64,
    pub d_kept: u64,
    pub pairs_checked: u64,
    /// Sampled pairs that passed every required formula, before `forbidden`.
    pub pairs_satisfying_required: u64,
    pub models: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub sizes: Vec<SizeStats>,
    pub budget_exceeded: bool,
    pub models_truncated: bool,
}

impl SearchStats {
    pub fn total_models(&self) -> u64 {
        self.sizes.iter().map(|s| s.models).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    pub models: Vec<FiniteModel>,
    pub stats: SearchStats,
}

/// Tables packed into bit masks; fits domains up to size 3.
#[derive(Clone, Copy)]
struct Masks {
    n: usize,
    b: u128,
    d: u128,
}

impl Structure for Masks {
    fn size(&self) -> usize {
        self.n
    }

    fn b(&self, x: usize, y: usize, z: usize) -> bool {
        self.b >> ((x * self.n + y) * self.n + z) & 1 == 1
    }

    fn d(&self, w: usize, x: usize, y: usize, z: usize) -> bool {
        self.d >> (((w * self.n + x) * self.n + y) * self.n + z) & 1 == 1
    }
}

impl Masks {
    fn to_model(self) -> FiniteModel {
        let n = self.n;
        let mut m = FiniteModel::empty(n);
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if self.b(x, y, z) {
                        m.between.insert([x, y, z]);
                    }
                    for w in 0..n {
                        if self.d(x, y, z, w) {
                            m.congruent.insert([x, y, z, w]);
                        }
                    }
                }
            }
        }
        m
    }
}

/// A condition on a model: the formula must hold, or must fail.
struct Check {
    formula: Compiled,
    want: bool,
}

impl Check {
    fn passes(&self, m: &Masks) -> bool {
        self.formula.holds(m) == self.want
    }

    /// Rough evaluation cost at domain size `n`.
    fn cost(&self, n: usize) -> u64 {
        (n as u64).saturating_pow(self.formula.binders as u32)
    }
}

#[derive(Default)]
struct Groups {
    b_only: Vec<Check>,
    d_only: Vec<Check>,
    mixed: Vec<Check>,
}

fn group(required: &[NamedFormula], forbidden: Option<&NamedFormula>, n: usize) -> Result<Groups, ModelError> {
    let mut g = Groups::default();
    let checks = required
        .iter()
        .map(|r| (r, true))
        .chain(forbidden.map(|f| (f, false)));
    for (nf, want) in checks {
        let formula = compile(&nf.sentence)?;
        let target = match (formula.uses_b, formula.uses_d) {
            (_, false) => &mut g.b_only,
            (false, true) => &mut g.d_only,
            (true, true) => &mut g.mixed,
        };
        target.push(Check { formula, want });
    }
    for list in [&mut g.b_only, &mut g.d_only, &mut g.mixed] {
        list.sort_by_key(|c| c.cost(n));
    }
    Ok(g)
}

fn all_pass(checks: &[Check], m: &Masks) -> bool {
    checks.iter().all(|c| c.passes(m))
}

fn exhaustive(n: usize, g: &Groups, budget: &SearchBudget) -> (Vec<Masks>, SizeStats, bool) {
    let b_bits = n * n * n;
    let d_bits = b_bits * n;
    let b_total = 1u128 << b_bits;
    let d_total = 1u128 << d_bits;
    let b_list: Vec<u128> = (0..b_total as u64)
        .into_par_iter()
        .map(u128::from)
        .filter(|&b| all_pass(&g.b_only, &Masks { n, b, d: 0 }))
        .collect();
    let d_list: Vec<u128> = (0..d_total as u64)
        .into_par_iter()
        .map(u128::from)
        .filter(|&d| all_pass(&g.d_only, &Masks { n, b: 0, d }))
        .collect();

    let total_pairs = b_list.len() as u64 * d_list.len() as u64;
    let exceeded = total_pairs > budget.max_pairs;
    let b_rows = if exceeded && !d_list.is_empty() {
        (budget.max_pairs / d_list.len() as u64) as usize
    } else {
        b_list.len()
    };
    let found: Vec<Masks> = b_list[..b_rows]
        .par_iter()
        .flat_map_iter(|&b| {
            let d_list = &d_list;
            d_list.iter().filter_map(move |&d| {
                let m = Masks { n, b, d };
                all_pass(&g.mixed, &m).then_some(m)
            })
        })
        .collect();
    let stats = SizeStats {
        size: n,
        sampled: false,
        b_tables: b_total as u64,
        b_kept: b_list.len() as u64,
        d_tables: d_total as u64,
        d_kept: d_list.len() as u64,
        pairs_checked: b_rows as u64 * d_list.len() as u64,
        pairs_satisfying_required: 0,
        models: found.len() as u64,
    };
    (found, stats, exceeded)
}

/// Draws a pair of tables. Half the draws are uniform. The other half are
/// shaped so that the common hypotheses are often met: congruence is
/// equality of colours given to ordered pairs (an equivalence relation,
/// symmetric half of the time, with null segments in a class of their own
/// half of the time), and betweenness contains the trivial triples plus a
/// random share of the others, often avoiding `B a b a` for `a != b`.
fn random_tables(n: usize, rng: &mut ChaCha8Rng) -> Masks {
    let b_bits = n * n * n;
    let d_bits = b_bits * n;
    let mask = |bits: usize| if bits >= 128 { u128::MAX } else { (1u128 << bits) - 1 };
    if rng.gen_bool(0.5) {
        return Masks {
            n,
            b: rng.gen::<u128>() & mask(b_bits),
            d: rng.gen::<u128>() & mask(d_bits),
        };
    }
    let colours = rng.gen_range(1..=4u8);
    let symmetric = rng.gen_bool(0.5);
    let null_apart = rng.gen_bool(0.5);
    let mut colour = vec![0u8; n * n];
    for x in 0..n {
        for y in 0..n {
            colour[x * n + y] = if x == y {
                0
            } else if symmetric && y < x {
                colour[y * n + x]
            } else if null_apart {
                rng.gen_range(1..=colours)
            } else {
                rng.gen_range(0..=colours)
            };
        }
    }
    let mut m = Masks { n, b: 0, d: 0 };
    for w in 0..n {
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if colour[w * n + x] == colour[y * n + z] {
                        m.d |= 1 << (((w * n + x) * n + y) * n + z);
                    }
                }
            }
        }
    }
    let density = rng.gen_range(0.05..0.95);
    let symmetric_b = rng.gen_bool(0.5);
    let no_returns = rng.gen_bool(0.5);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let trivial = x == y || y == z;
                if no_returns && x == z && !trivial {
                    continue;
                }
                if trivial || rng.gen_bool(density) {
                    m.b |= 1 << ((x * n + y) * n + z);
                    if symmetric_b {
                        m.b |= 1 << ((z * n + y) * n + x);
                    }
                }
            }
        }
    }
    m
}

fn sampled(n: usize, g: &Groups, samples: u64, seed: u64) -> (Vec<Masks>, SizeStats) {
    let mut ordered: Vec<&Check> = g.b_only.iter().chain(&g.d_only).chain(&g.mixed).collect();
    ordered.sort_by_key(|c| c.cost(n));
    let (required, forbidden): (Vec<&Check>, Vec<&Check>) = ordered.into_iter().partition(|c| c.want);
    let results: Vec<(bool, Option<Masks>)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let m = random_tables(n, &mut rng);
            if !required.iter().all(|c| c.passes(&m)) {
                return (false, None);
            }
            (true, forbidden.iter().all(|c| c.passes(&m)).then_some(m))
        })
        .collect();
    let satisfying = results.iter().filter(|r| r.0).count() as u64;
    let found: Vec<Masks> = results.into_iter().filter_map(|r| r.1).collect();
    let stats = SizeStats {
        size: n,
        sampled: true,
        b_tables: samples,
        b_kept: 0,
        d_tables: samples,
        d_kept: 0,
        pairs_checked: samples,
        pairs_satisfying_required: satisfying,
        models: found.len() as u64,
    };
    (found, stats)
}

/// Finite models of size `1..=max_size` satisfying every formula in
/// `required` and, when given, falsifying `forbidden`.
pub fn search_finite_models(
    required: &[NamedFormula],
    forbidden: Option<&NamedFormula>,
    max_size: usize,
    budget: &SearchBudget,
) -> Result<SearchOutcome, ModelError> {
    let limit = match budget.mode {
        SearchMode::Exhaustive => 2,
        SearchMode::Sampled { .. } => 3,
    };
    if max_size > limit {
        return Err(ModelError::TooLarge(max_size));
    }
    let mut stats = SearchStats::default();
    let mut models = Vec::new();
    for n in 1..=max_size {
        let g = group(required, forbidden, n)?;
        let found = match budget.mode {
            SearchMode::Sampled { samples, seed } if n == 3 => {
                let (found, s) = sampled(n, &g, samples, seed);
                stats.sizes.push(s);
                found
            }
            _ => {
                let (found, s, exceeded) = exhaustive(n, &g, budget);
                stats.budget_exceeded |= exceeded;
                stats.sizes.push(s);
                found
            }
        };
        for m in found {
            if models.len() < budget.max_models {
                models.push(m.to_model());
            } else {
                stats.models_truncated = true;
            }
        }
    }
    Ok(SearchOutcome { models, stats })
}
