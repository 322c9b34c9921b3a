//! Exhaustive enumeration of the maximal good sets of vector types whose open
//! angle polytope is nonempty, and their classification up to the dihedral
//! group.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::{affine_dim, int, lp_maximize, lp_minimize, rank, primitive_integer_vector, LinearSystem, LpOutcome, Rational};
use crate::vectypes::{
    angle_system, canonical_form, central_open_point, compat, compat_from_point, is_good,
    min_vector, apply_perm, Permutation5, VecType, VecTypeError, VecTypeSet,
};

pub const MAX_RECURSE_CALLS: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumError {
    #[error("no direction u satisfies the branching conditions for {0:?}")]
    NoSuchU(VecTypeSet),
    #[error("candidate set is unbounded for {0:?}")]
    UnboundedCandidates(VecTypeSet),
    #[error("more than {MAX_RECURSE_CALLS} recursive calls")]
    Budget,
    #[error(transparent)]
    VecType(#[from] VecTypeError),
    #[error("golden table: {0}")]
    Golden(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumStats {
    pub recurse_calls: u64,
    pub maximal_sets_found: u64,
    pub max_depth: u32,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// A direction with zero sum, orthogonal to `x`, negative on the coordinates
/// among 4 and 5 whose minimum over the ordered polytope is 0. Scaled to a
/// primitive integer vector.
///
/// Among such directions we prefer one whose positive part sits on coordinates
/// with small bounds `2/m_i`, which keeps the candidate set small.
pub fn choose_u(x: &VecTypeSet, m: &[Rational]) -> Result<Vec<Rational>, EnumError> {
    let zero_coords: Vec<usize> = (3..5).filter(|&i| m[i].is_zero()).collect();
    if zero_coords.is_empty() {
        return Ok(vec![int(0); 5]);
    }
    let u = balanced_u(x, m, &zero_coords).or_else(|| margin_u(x, &zero_coords));
    match u {
        Some(u) => Ok(primitive_integer_vector(&u).into_iter().map(Rational::from_integer).collect()),
        None => Err(EnumError::NoSuchU(x.clone())),
    }
}

/// Rows shared by both programs: `sum u = 0` and `u·v = 0`, padded to `width`.
fn u_system(x: &VecTypeSet, width: usize) -> LinearSystem {
    let mut s = LinearSystem::new(width);
    let mut ones = vec![int(0); width];
    ones[..5].fill(int(1));
    s.push_eq(ones, int(0));
    for v in x.iter() {
        let mut c = v.to_rationals();
        c.resize(width, int(0));
        s.push_eq(c, int(0));
    }
    s
}

/// Minimizes `sum_j (2/m_j) max(0, u_j)` with the zero-bound coordinates
/// summing to -1, each at most `-1/(2k)` for `k` such coordinates.
fn balanced_u(x: &VecTypeSet, m: &[Rational], zero_coords: &[usize]) -> Option<Vec<Rational>> {
    // Variables u_1..u_5, p_1..p_5 with p_j >= max(0, u_j).
    let mut s = u_system(x, 10);
    let mut total = vec![int(0); 10];
    let cap = -Rational::new(1.into(), (2 * zero_coords.len()).into());
    for &i in zero_coords {
        total[i] = int(1);
        let mut c = vec![int(0); 10];
        c[i] = int(1);
        s.push_le(c, cap.clone());
    }
    s.push_eq(total, int(-1));
    let mut obj = vec![int(0); 10];
    for j in 0..5 {
        let mut c = vec![int(0); 10];
        c[j] = int(1);
        c[5 + j] = int(-1);
        s.push_le(c, int(0));
        let mut c = vec![int(0); 10];
        c[5 + j] = int(-1);
        s.push_le(c, int(0));
        if !zero_coords.contains(&j) {
            obj[5 + j] = int(2) / &m[j];
        }
    }
    match lp_minimize(&obj, &s) {
        LpOutcome::Optimum { witness, .. } => Some(witness[..5].to_vec()),
        _ => None,
    }
}

/// Maximizes a common margin `t` with `u_i <= -t` on the zero-bound
/// coordinates inside the box `[-1, 1]^5`.
fn margin_u(x: &VecTypeSet, zero_coords: &[usize]) -> Option<Vec<Rational>> {
    let mut s = u_system(x, 6);
    for i in 0..5 {
        let mut c = vec![int(0); 6];
        c[i] = int(1);
        s.push_le(c.clone(), int(1));
        s.push_ge(c, int(-1));
    }
    for &i in zero_coords {
        let mut c = vec![int(0); 6];
        c[i] = int(1);
        c[5] = int(1);
        s.push_le(c, int(0));
    }
    let mut t = vec![int(0); 6];
    t[5] = int(1);
    s.push_le(t.clone(), int(1));
    match lp_maximize(&t, &s) {
        LpOutcome::Optimum { value, witness } if value.is_positive() => Some(witness[..5].to_vec()),
        _ => None,
    }
}

/// `{v in N^5 : v·u >= 0, v·m <= 2}` without the zero vector.
pub fn candidate_vectors(x: &VecTypeSet, u: &[Rational], m: &[Rational]) -> Result<VecTypeSet, EnumError> {
    let u_int = primitive_integer_vector(u);
    for i in 0..5 {
        if m[i].is_zero() && !u_int[i].is_negative() {
            return Err(EnumError::UnboundedCandidates(x.clone()));
        }
    }
    let mut out = Vec::new();
    let mut v = [0u32; 5];
    candidates_level(&u_int, m, 0, &int(2), &BigInt::zero(), &mut v, &mut out);
    Ok(VecTypeSet::new(out.into_iter().filter(|w| *w != VecType::ZERO)))
}

fn candidates_level(
    u: &[BigInt],
    m: &[Rational],
    i: usize,
    budget: &Rational,
    partial_u: &BigInt,
    v: &mut [u32; 5],
    out: &mut Vec<VecType>,
) {
    if i == 5 {
        if !partial_u.is_negative() {
            out.push(VecType(*v));
        }
        return;
    }
    let bound: u32 = if m[i].is_positive() {
        (budget / &m[i]).floor().to_integer().to_u32().unwrap()
    } else {
        // Only trailing coordinates have m_i = 0, and there u_i < 0, so the
        // running sum v·u can only drop from here on.
        if partial_u.is_negative() {
            return;
        }
        Integer::div_floor(partial_u, &-&u[i]).to_u32().unwrap()
    };
    for k in 0..=bound {
        v[i] = k;
        let b = budget - &m[i] * int(k as i64);
        let pu = partial_u + &u[i] * k;
        candidates_level(u, m, i + 1, &b, &pu, v, out);
    }
    v[i] = 0;
}

fn span_rows(x: &VecTypeSet) -> Vec<Vec<Rational>> {
    let mut rows = vec![vec![int(1); 5]];
    rows.extend(x.iter().map(VecType::to_rationals));
    rows
}

struct Recursion<'a> {
    stats: EnumStats,
    found: BTreeSet<VecTypeSet>,
    sink: &'a mut dyn FnMut(&VecTypeSet),
}

impl Recursion<'_> {
    fn visit(
        &mut self,
        x: &VecTypeSet,
        alpha: Option<Vec<Rational>>,
        excluded: &VecTypeSet,
        depth: u32,
    ) -> Result<(), EnumError> {
        self.count_call(depth)?;
        // The open ordered polytope is tested first; P_X = P_Compat(X), so the
        // point found also seeds the closure.
        let Some(alpha) = alpha.or_else(|| central_open_point(x, true)) else {
            return Ok(());
        };
        let x = compat_from_point(x, &alpha);
        if x.intersects(excluded) {
            return Ok(());
        }
        if !x.is_empty() && is_good(&x) && self.found.insert(x.clone()) {
            self.stats.maximal_sets_found += 1;
            (self.sink)(&x);
        }
        let m = min_vector(&x)?;
        let u = choose_u(&x, &m)?;
        let candidates = candidate_vectors(&x, &u, &m)?;
        // Children whose open polytope is empty return at once; doing that
        // check here lets every sibling subtree skip them as well.
        // When X pins alpha to a single point, Compat(X) already holds every w
        // with w·alpha = 2 and all other children are dead.
        let pinned = rank(&span_rows(&x)) == 5;
        let mut live = Vec::new();
        let mut excluded = excluded.clone();
        for w in candidates.iter() {
            if x.contains(w) || excluded.contains(w) {
                continue;
            }
            let alpha = if pinned { None } else { central_open_point(&x.with(*w), true) };
            match alpha {
                Some(alpha) => live.push((*w, alpha)),
                None => {
                    self.count_call(depth + 1)?;
                    excluded = excluded.with(*w);
                }
            }
        }
        for (w, alpha) in live {
            self.visit(&x.with(w), Some(alpha), &excluded, depth + 1)?;
            excluded = excluded.with(w);
        }
        Ok(())
    }

    fn count_call(&mut self, depth: u32) -> Result<(), EnumError> {
        self.stats.recurse_calls += 1;
        self.stats.max_depth = self.stats.max_depth.max(depth);
        if self.stats.recurse_calls > MAX_RECURSE_CALLS {
            return Err(EnumError::Budget);
        }
        Ok(())
    }
}

/// Calls `sink` once for every maximal good `Y ⊇ X` avoiding `excluded` whose
/// ordered polytope meets the open cube.
pub fn recurse(
    x: &VecTypeSet,
    excluded: &VecTypeSet,
    sink: &mut dyn FnMut(&VecTypeSet),
) -> Result<EnumStats, EnumError> {
    let start = Instant::now();
    let mut r = Recursion { stats: EnumStats::default(), found: BTreeSet::new(), sink };
    r.visit(x, None, excluded, 0)?;
    r.stats.elapsed = start.elapsed();
    Ok(r.stats)
}

/// One class of maximal good sets up to the dihedral group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodSetRecord {
    pub index: usize,
    pub maximal_set: VecTypeSet,
    pub basis: VecTypeSet,
    pub canonical: VecTypeSet,
    pub dim: i64,
    pub struck: bool,
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    /// The maximal sets with a nonempty open ordered polytope.
    pub ordered: Vec<VecTypeSet>,
    /// Number of distinct sets over all coordinate permutations.
    pub permuted_count: usize,
    pub records: Vec<GoodSetRecord>,
    pub stats: EnumStats,
}

impl Enumeration {
    pub fn dim_counts(&self) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        for r in &self.records {
            *out.entry(r.dim).or_insert(0) += 1;
        }
        out
    }

    pub fn record(&self, index: usize) -> Option<&GoodSetRecord> {
        self.records.iter().find(|r| r.index == index)
    }
}

/// A row of the class table shipped in the data directory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenEntry {
    pub index: usize,
    pub dim: i64,
    pub struck: bool,
    /// Members in the printed order.
    pub basis: Vec<VecType>,
}

impl GoldenEntry {
    pub fn basis_set(&self) -> VecTypeSet {
        VecTypeSet::new(self.basis.iter().copied())
    }
}

pub const GOLDEN_TABLE: &str = include_str!("../../../data/table1.txt");

pub fn parse_golden(text: &str) -> Result<Vec<GoldenEntry>, EnumError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |what: &str| EnumError::Golden(format!("line {}: {what}", n + 1));
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(bad("expected four tab-separated columns"));
        }
        let index = cols[0].parse().map_err(|_| bad("index"))?;
        let dim = cols[1].parse().map_err(|_| bad("dim"))?;
        let struck = match cols[2] {
            "0" => false,
            "1" => true,
            _ => return Err(bad("struck flag")),
        };
        let basis = cols[3]
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<Vec<VecType>, _>>()
            .map_err(|e| bad(&e.to_string()))?;
        out.push(GoldenEntry { index, dim, struck, basis });
    }
    Ok(out)
}

pub fn golden_table() -> Vec<GoldenEntry> {
    parse_golden(GOLDEN_TABLE).expect("shipped table parses")
}

/// Minimal subsets of `x` generating the same polytope, of size `4 - dim`,
/// in lexicographic order of their sorted member lists.
pub fn minimal_bases(x: &VecTypeSet, dim: i64) -> Vec<VecTypeSet> {
    let k = (4 - dim) as usize;
    let members = x.members();
    let mut out = Vec::new();
    let mut pick = Vec::new();
    fn rec(members: &[VecType], start: usize, k: usize, pick: &mut Vec<VecType>, x: &VecTypeSet, out: &mut Vec<VecTypeSet>) {
        if pick.len() == k {
            let b = VecTypeSet::new(pick.iter().copied());
            if compat(&b).as_ref() == Ok(x) {
                out.push(b);
            }
            return;
        }
        for i in start..members.len() {
            pick.push(members[i]);
            rec(members, i + 1, k, pick, x, out);
            pick.pop();
        }
    }
    rec(members, 0, k, &mut pick, x, &mut out);
    out.sort();
    out
}

/// Runs the full enumeration: the recursion from the empty set, the expansion
/// over all coordinate permutations and the grouping into dihedral classes.
/// Class indices and strike flags come from `golden`; classes missing from it
/// are numbered after the last golden index.
pub fn enumerate_all(golden: &[GoldenEntry]) -> Result<Enumeration, EnumError> {
    let start = Instant::now();
    let mut ordered = Vec::new();
    let mut stats = recurse(&VecTypeSet::default(), &VecTypeSet::default(), &mut |y| ordered.push(y.clone()))?;
    ordered.sort();

    let perms = Permutation5::all();
    let permuted: BTreeSet<VecTypeSet> =
        ordered.iter().flat_map(|y| perms.iter().map(move |p| apply_perm(p, y))).collect();
    let classes: BTreeSet<VecTypeSet> = permuted.iter().map(canonical_form).collect();

    let mut by_canonical: BTreeMap<VecTypeSet, &GoldenEntry> = BTreeMap::new();
    for g in golden {
        if let Ok(c) = compat(&g.basis_set()) {
            by_canonical.insert(canonical_form(&c), g);
        }
    }
    let mut next_index = golden.iter().map(|g| g.index).max().unwrap_or(0);
    let mut records = Vec::with_capacity(classes.len());
    for c in classes {
        let dim = affine_dim(&angle_system(&c, false));
        // A golden class keeps the printed orientation of its basis, so the
        // record reads exactly like the table.
        let record = match by_canonical.get(&c) {
            Some(g) => GoodSetRecord {
                index: g.index,
                maximal_set: compat(&g.basis_set())?,
                basis: g.basis_set(),
                canonical: c,
                dim,
                struck: g.struck,
            },
            None => {
                next_index += 1;
                let basis = minimal_bases(&c, dim).into_iter().next().unwrap_or_else(|| c.clone());
                GoodSetRecord { index: next_index, maximal_set: c.clone(), basis, canonical: c, dim, struck: false }
            }
        };
        records.push(record);
    }
    records.sort_by_key(|r| r.index);
    stats.elapsed = start.elapsed();
    Ok(Enumeration { ordered, permuted_count: permuted.len(), records, stats })
}

/// Per-dimension sections listing each class's index and basis.
pub fn emit_tables(records: &[GoodSetRecord]) -> String {
    let mut out = String::new();
    for dim in (0..=3).rev() {
        let _ = writeln!(out, "# dim(P) = {dim}");
        for r in records.iter().filter(|r| r.dim == dim) {
            let mark = if r.struck { "*" } else { "" };
            let _ = writeln!(out, "{}{mark}\t{}", r.index, r.basis);
        }
    }
    out
}

/// Parses the output of [`emit_tables`] back into `(index, struck, dim, basis)`.
pub fn parse_tables(text: &str) -> Result<Vec<(usize, bool, i64, VecTypeSet)>, EnumError> {
    let mut dim = None;
    let mut out = Vec::new();
    for line in text.lines() {
        if let Some(d) = line.strip_prefix("# dim(P) = ") {
            dim = Some(d.trim().parse().map_err(|_| EnumError::Golden(line.into()))?);
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (head, basis) = line.split_once('\t').ok_or_else(|| EnumError::Golden(line.into()))?;
        let (idx, struck) = match head.strip_suffix('*') {
            Some(h) => (h, true),
            None => (head, false),
        };
        let index = idx.parse().map_err(|_| EnumError::Golden(line.into()))?;
        let basis = basis.parse()?;
        out.push((index, struck, dim.ok_or_else(|| EnumError::Golden(line.into()))?, basis));
    }
    Ok(out)
}

/// One line per class: index, dim, struck flag, basis, full maximal set.
pub fn goodsets_tsv(records: &[GoodSetRecord]) -> String {
    let mut out = String::from("index\tdim\tstruck\tbasis\tmaximal_set\n");
    for r in records {
        let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", r.index, r.dim, u8::from(r.struck), r.basis, r.maximal_set);
    }
    out
}
