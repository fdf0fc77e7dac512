//! Guessing recurrences from tables of sequence values.
//!
//! An ansatz `Σ c_{a,b} M^a L^b` with unknown constants `c_{a,b}` is applied
//! to the sequence at many indices `n`; with `q` specialized to `q0 = v0^6`
//! modulo a prime every index gives one linear equation
//! `Σ c_{a,b} q0^{n·a} f(n + b) = 0`. The nullspace of the resulting system
//! is the space of candidate operators with that support.
//!
//! [`support_search`] walks the L-monomials in increasing order, as FGLM
//! does, and for each monomial outside the current staircase finds the
//! smallest M-degree admitting a relation. [`exact_lift`] turns a shape into
//! an exact operator over `Q(q)` by solving the refined ansatz at many
//! random specializations and reconstructing the coefficients.

use std::fmt;

use rand::{Rng, SeedableRng};

use crate::arith::bipoly::BiPoly;
use crate::arith::modp::{PrimeField, DEFAULT_PRIME};
use crate::groebner::order::{divides, LMono, Precedence, TermOrder};
use crate::jones::{jones_table, JonesError, SequenceTable, TableMode, TorusKnot};
use crate::linalg::Echelon;
use crate::ore::{ore_apply, ore_apply_mod, ExactField, ModularOracle, Ore, OreError, OreOp, SymbolicOracle};
use crate::recon::{self, ReconError};

#[derive(thiserror::Error, Debug)]
pub enum GuessError {
    #[error("insufficient data: the ansatz needs the table up to n = {needed}, have {have}")]
    InsufficientData { needed: u32, have: u32 },
    #[error("empty structure set")]
    EmptyStructure,
    #[error("expected a {0} table")]
    WrongMode(&'static str),
    #[error("unlucky specialization v0 = {v0}, p = {p}: {reason}")]
    Unlucky { v0: u64, p: u64, reason: String },
    #[error("shape {0} has no exact solution (modular artifact)")]
    Spurious(String),
    #[error("lifted operator fails verification at {0} points")]
    Unverified(usize),
    #[error(transparent)]
    Jones(#[from] JonesError),
    #[error(transparent)]
    Ore(#[from] OreError),
    #[error(transparent)]
    Recon(#[from] ReconError),
}

pub type Result<T> = std::result::Result<T, GuessError>;

/// Default margin of extra equations, in percent of the unknowns.
pub const DEFAULT_OVERSAMPLING: u32 = 20;

/// One unknown `c` of the ansatz, standing for `c · M1^a1 M2^a2 L1^b1 L2^b2`.
pub type Entry = (u32, u32, u32, u32);

/// The finite exponent support of an ansatz.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StructureSet {
    entries: Vec<Entry>,
}

/// M-monomials of total degree at most `d`, by degree, then by falling
/// `M1` exponent.
pub fn m_monomials(d: u32) -> impl Iterator<Item = (u32, u32)> {
    (0..=d).flat_map(|t| (0..=t).rev().map(move |a1| (a1, t - a1)))
}

impl StructureSet {
    pub fn new(entries: Vec<Entry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(GuessError::EmptyStructure);
        }
        let mut seen = std::collections::HashSet::new();
        let entries = entries.into_iter().filter(|e| seen.insert(*e)).collect();
        Ok(Self { entries })
    }

    /// Every M-monomial of total degree at most `mdeg` on every L-monomial
    /// of `support`.
    pub fn dense(support: &[LMono], mdeg: u32) -> Self {
        let entries = support
            .iter()
            .flat_map(|&(b1, b2)| m_monomials(mdeg).map(move |(a1, a2)| (a1, a2, b1, b2)))
            .collect();
        Self { entries }
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest L-shift in each direction.
    pub fn max_shift(&self) -> (u32, u32) {
        self.entries.iter().fold((0, 0), |(x, y), e| (x.max(e.2), y.max(e.3)))
    }

    /// Distinct L-monomials, in order of first appearance.
    pub fn l_support(&self) -> Vec<LMono> {
        let mut out: Vec<LMono> = Vec::new();
        for e in &self.entries {
            if !out.contains(&(e.2, e.3)) {
                out.push((e.2, e.3));
            }
        }
        out
    }

    /// The entries flagged `true` in `mask`.
    pub fn restrict(&self, mask: &[bool]) -> Result<Self> {
        assert_eq!(mask.len(), self.entries.len());
        Self::new(self.entries.iter().zip(mask).filter(|(_, &k)| k).map(|(e, _)| *e).collect())
    }
}

/// Number of equations for `unknowns` unknowns with the given margin.
pub fn equations_needed(unknowns: usize, oversampling: u32) -> usize {
    unknowns + (unknowns * oversampling as usize).div_ceil(100)
}

/// Side of the smallest square grid with at least `count` points.
pub fn grid_side(count: usize) -> u32 {
    let mut s = (count as f64).sqrt() as u32;
    while (s as usize) * (s as usize) < count {
        s += 1;
    }
    s.max(1)
}

/// The points of `[0, side)²` in row-major order.
pub fn grid_points(side: u32) -> Vec<(u32, u32)> {
    (0..side).flat_map(|i| (0..side).map(move |j| (i, j))).collect()
}

/// Side of the evaluation grid for `structure`: enough points for the
/// oversampled system, and more than the largest M-degree in each
/// direction, since a polynomial of degree `d` can vanish on a `d × d` grid.
pub fn structure_grid_side(structure: &StructureSet, oversampling: u32) -> u32 {
    let dmax = structure.entries.iter().map(|e| e.0 + e.1).max().unwrap_or(0);
    grid_side(equations_needed(structure.len(), oversampling)).max(dmax + 1)
}

/// Table size needed to set up the ansatz for `structure`.
pub fn required_n_max(structure: &StructureSet, oversampling: u32) -> u32 {
    let side = structure_grid_side(structure, oversampling);
    let (s1, s2) = structure.max_shift();
    side - 1 + s1.max(s2)
}

/// How a system was set up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub v0: u64,
    pub p: u64,
    pub grid_side: u32,
    pub equations: usize,
    pub unknowns: usize,
    pub oversampling: u32,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "v0={} p={} grid={}x{} equations={} unknowns={} oversampling={}%",
            self.v0, self.p, self.grid_side, self.grid_side, self.equations, self.unknowns, self.oversampling
        )
    }
}

/// Default `v0` for guessing. At `p = 2^31 - 1`, `2^6` has multiplicative
/// order 31, and the sequence at a root of unity of small order satisfies
/// relations that the generic sequence does not; `3^6` has order
/// 119304647.
pub const DEFAULT_GUESS_V0: u64 = 3;

/// Rejects specializations where `q0 = v0^6` repeats within `n_max` steps.
pub fn check_order(v0: u64, p: u64, n_max: u32) -> Result<()> {
    let fp = PrimeField::new(p).map_err(|_| GuessError::WrongMode("modular"))?;
    let ord = fp.order(fp.pow(v0, 6));
    if ord <= n_max as u64 + 1 {
        return Err(GuessError::Unlucky { v0, p, reason: format!("q0 = v0^6 has order {ord}, table needs more than {}", n_max + 1) });
    }
    Ok(())
}

/// A modular table together with an ansatz and the indices to sample.
#[derive(Clone, Debug)]
pub struct GuessProblem<'a> {
    pub table: &'a SequenceTable,
    pub structure: &'a StructureSet,
    pub points: Vec<(u32, u32)>,
}

impl<'a> GuessProblem<'a> {
    /// The default square grid for `structure`, checked against the table.
    pub fn new(table: &'a SequenceTable, structure: &'a StructureSet, oversampling: u32) -> Result<Self> {
        let side = structure_grid_side(structure, oversampling);
        let needed = required_n_max(structure, oversampling);
        if needed > table.n_max() {
            return Err(GuessError::InsufficientData { needed, have: table.n_max() });
        }
        Ok(Self { table, structure, points: grid_points(side) })
    }

    fn field(&self) -> Result<(u64, PrimeField)> {
        match self.table.mode() {
            TableMode::Modular { v0, p } => {
                let fp = PrimeField::new(*p).map_err(|_| GuessError::WrongMode("modular"))?;
                Ok((*v0, fp))
            }
            TableMode::Symbolic => Err(GuessError::WrongMode("modular")),
        }
    }

    fn check_domain(&self) -> Result<()> {
        let (s1, s2) = self.structure.max_shift();
        let needed = self.points.iter().map(|&(a, b)| (a + s1).max(b + s2)).max().unwrap_or(0);
        if needed > self.table.n_max() {
            return Err(GuessError::InsufficientData { needed, have: self.table.n_max() });
        }
        Ok(())
    }

    /// Rows of the system, produced lazily.
    pub fn rows(&self) -> Result<impl Iterator<Item = Vec<u32>> + '_> {
        let (v0, fp) = self.field()?;
        self.check_domain()?;
        let q0 = fp.pow(v0, 6);
        let (amax1, amax2) = self.structure.entries.iter().fold((0, 0), |(x, y), e| (x.max(e.0), y.max(e.1)));
        Ok(self.points.iter().map(move |&(n1, n2)| {
            let x = fp.pow(q0, n1 as u64);
            let y = fp.pow(q0, n2 as u64);
            let xp = powers(&fp, x, amax1);
            let yp = powers(&fp, y, amax2);
            self.structure
                .entries
                .iter()
                .map(|&(a1, a2, b1, b2)| {
                    let f = self.table.modular(n1 + b1, n2 + b2).expect("checked domain");
                    fp.mul(fp.mul(xp[a1 as usize], yp[a2 as usize]), f) as u32
                })
                .collect()
        }))
    }

    pub fn provenance(&self, oversampling: u32) -> Provenance {
        let (v0, p) = match self.table.mode() {
            TableMode::Modular { v0, p } => (*v0, *p),
            TableMode::Symbolic => (0, 0),
        };
        let side = self.points.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
        Provenance {
            v0,
            p,
            grid_side: side,
            equations: self.points.len(),
            unknowns: self.structure.len(),
            oversampling,
        }
    }
}

fn powers(fp: &PrimeField, x: u64, n: u32) -> Vec<u64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut c = 1;
    for _ in 0..=n {
        out.push(c);
        c = fp.mul(c, x);
    }
    out
}

/// The system as a dense matrix, one row per evaluation point.
pub fn build_system(prob: &GuessProblem) -> Result<Vec<Vec<u32>>> {
    Ok(prob.rows()?.collect())
}

/// Nullspace basis of `rows` over `fp` (pivots chosen leftmost; one basis
/// vector per free column).
pub fn modular_kernel(fp: &PrimeField, cols: usize, rows: &[Vec<u32>]) -> Vec<Vec<u64>> {
    crate::linalg::kernel(fp, cols, rows.iter().cloned())
}

/// Dimension of the nullspace, stopping early once the rows have full rank.
pub fn kernel_dimension(prob: &GuessProblem) -> Result<usize> {
    let (_, fp) = prob.field()?;
    let cols = prob.structure.len();
    let mut e = Echelon::new(fp, cols);
    for (i, r) in prob.rows()?.enumerate() {
        e.push_row(r);
        if i + 1 >= cols && (i + 1) % 64 == 0 && e.is_full_rank() {
            return Ok(0);
        }
    }
    Ok(cols - e.rank())
}

/// Outcome of one ansatz.
#[derive(Clone, Debug)]
pub struct GuessResult {
    pub structure: StructureSet,
    pub kernel_dim: usize,
    /// Which unknowns are nonzero, when the kernel is one-dimensional.
    pub pattern: Option<Vec<bool>>,
    /// The kernel vector (scaled so its first nonzero entry is 1).
    pub solution: Option<Vec<u64>>,
    pub op: Option<OreOp>,
    pub provenance: Provenance,
}

/// Solves the ansatz `structure` on a modular table.
pub fn guess(table: &SequenceTable, structure: &StructureSet, oversampling: u32) -> Result<GuessResult> {
    let prob = GuessProblem::new(table, structure, oversampling)?;
    let (_, fp) = prob.field()?;
    let mut e = Echelon::new(fp.clone(), structure.len());
    for r in prob.rows()? {
        e.push_row(r);
    }
    let ker = e.kernel();
    let (pattern, solution) = if ker.len() == 1 {
        let v = &ker[0];
        let first = v.iter().find(|&&x| x != 0).copied().unwrap_or(1);
        let inv = fp.inv(first).unwrap();
        let v: Vec<u64> = v.iter().map(|&x| fp.mul(x, inv)).collect();
        (Some(v.iter().map(|&x| x != 0).collect()), Some(v))
    } else {
        (None, None)
    };
    Ok(GuessResult {
        structure: structure.clone(),
        kernel_dim: ker.len(),
        pattern,
        solution,
        op: None,
        provenance: prob.provenance(oversampling),
    })
}

/// Search bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub max_ldeg: u32,
    pub max_mdeg: u32,
    pub oversampling: u32,
    pub precedence: Precedence,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { max_ldeg: 3, max_mdeg: 30, oversampling: DEFAULT_OVERSAMPLING, precedence: Precedence::L1First }
    }
}

impl SearchConfig {
    pub fn order(&self) -> TermOrder {
        TermOrder::deglex().with_precedence(self.precedence)
    }

    /// L-monomials of degree at most `max_ldeg`, increasing.
    pub fn monomials(&self) -> Vec<LMono> {
        let mut v: Vec<LMono> = (0..=self.max_ldeg).flat_map(|t| (0..=t).map(move |i| (i, t - i))).collect();
        let o = self.order();
        v.sort_by(|a, b| o.cmp(*a, *b));
        v
    }

    /// Table size that covers every ansatz the search can set up.
    pub fn required_n_max(&self) -> u32 {
        let all = self.monomials();
        required_n_max(&StructureSet::dense(&all, self.max_mdeg), self.oversampling)
    }
}

/// A minimal relation found by the search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shape {
    pub lead: LMono,
    /// The staircase at the time, followed by `lead`.
    pub support: Vec<LMono>,
    pub mdeg: u32,
    pub provenance: Provenance,
}

impl Shape {
    pub fn structure(&self) -> StructureSet {
        StructureSet::dense(&self.support, self.mdeg)
    }
}

/// What the search concluded about one L-monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    /// A multiple of an earlier leading monomial; not examined.
    Skipped,
    /// No relation up to the degree bound; the monomial joins the staircase.
    Staircase,
    /// A relation of the given M-degree.
    Relation(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchReport {
    pub shapes: Vec<Shape>,
    pub staircase: Vec<LMono>,
    pub steps: Vec<(LMono, Step)>,
    pub config: SearchConfig,
    pub v0: u64,
    pub p: u64,
}

pub fn format_lmono(m: LMono) -> String {
    match m {
        (0, 0) => "1".into(),
        (a, 0) => if a == 1 { "L1".into() } else { format!("L1^{a}") },
        (0, b) => if b == 1 { "L2".into() } else { format!("L2^{b}") },
        (a, b) => format!("{}*{}", format_lmono((a, 0)), format_lmono((0, b))),
    }
}

pub fn format_support(s: &[LMono]) -> String {
    let v: Vec<String> = s.iter().map(|&m| format_lmono(m)).collect();
    format!("{{{}}}", v.join(", "))
}

impl fmt::Display for SearchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "specialization: v0={} p={}", self.v0, self.p)?;
        writeln!(
            f,
            "bounds: max_ldeg={} max_mdeg={} oversampling={}%",
            self.config.max_ldeg, self.config.max_mdeg, self.config.oversampling
        )?;
        for (m, s) in &self.steps {
            let what = match s {
                Step::Skipped => "skipped".to_string(),
                Step::Staircase => "staircase".to_string(),
                Step::Relation(d) => format!("relation mdeg={d}"),
            };
            writeln!(f, "step {}: {what}", format_lmono(*m))?;
        }
        for s in &self.shapes {
            writeln!(f, "shape lead={} mdeg={} support={} [{}]", format_lmono(s.lead), s.mdeg, format_support(&s.support), s.provenance)?;
        }
        writeln!(f, "staircase: {}", format_support(&self.staircase))
    }
}

/// Kernel dimension of the dense ansatz on `support` with M-degree `d`.
fn dense_kernel_dim(table: &SequenceTable, support: &[LMono], d: u32, over: u32) -> Result<(usize, Provenance)> {
    let st = StructureSet::dense(support, d);
    let prob = GuessProblem::new(table, &st, over)?;
    Ok((kernel_dimension(&prob)?, prob.provenance(over)))
}

/// Smallest `t` with `t (t + 1) / 2 == k`.
fn triangular_root(k: usize) -> Option<u32> {
    let t = ((2.0 * k as f64).sqrt()) as usize;
    (t.saturating_sub(1)..=t + 1).find(|&t| t * (t + 1) / 2 == k).map(|t| t as u32)
}

/// Minimal M-degree of a relation on `support`, given the kernel dimension
/// `k` at the bound `dmax`. A single relation of degree `d` contributes one
/// kernel vector per M-monomial multiple, `C(dmax - d + 2, 2)` in all,
/// which gives a first guess that is then checked at `d` and `d - 1`; if the
/// count is not of that form the degree is found by bisection.
fn minimal_degree(table: &SequenceTable, support: &[LMono], dmax: u32, k: usize, over: u32) -> Result<(u32, Provenance)> {
    let at = |d: u32| dense_kernel_dim(table, support, d, over);
    if let Some(t) = triangular_root(k) {
        if t >= 1 && t <= dmax + 1 {
            let d = dmax + 1 - t;
            let (kd, prov) = at(d)?;
            if kd == 1 && (d == 0 || at(d - 1)?.0 == 0) {
                return Ok((d, prov));
            }
        }
    }
    let (mut lo, mut hi) = (0u32, dmax);
    if at(0)?.0 > 0 {
        hi = 0;
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        if at(mid)?.0 > 0 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let (kd, prov) = at(hi)?;
    if kd != 1 {
        let v0 = prov.v0;
        let p = prov.p;
        return Err(GuessError::Unlucky { v0, p, reason: format!("kernel dimension {kd} at the minimal degree {hi}") });
    }
    Ok((hi, prov))
}

/// FGLM-style search for the leading monomials of the annihilator and the
/// minimal M-degrees of the corresponding relations.
pub fn support_search(table: &SequenceTable, config: &SearchConfig) -> Result<SearchReport> {
    let (v0, p) = match table.mode() {
        TableMode::Modular { v0, p } => (*v0, *p),
        TableMode::Symbolic => return Err(GuessError::WrongMode("modular")),
    };
    check_order(v0, p, table.n_max())?;
    let mut staircase: Vec<LMono> = Vec::new();
    let mut shapes: Vec<Shape> = Vec::new();
    let mut steps = Vec::new();
    for m in config.monomials() {
        if shapes.iter().any(|s| divides(s.lead, m)) {
            steps.push((m, Step::Skipped));
            continue;
        }
        let mut support = staircase.clone();
        support.push(m);
        let (k, _) = dense_kernel_dim(table, &support, config.max_mdeg, config.oversampling)?;
        if k == 0 {
            staircase.push(m);
            steps.push((m, Step::Staircase));
            continue;
        }
        let (d, provenance) = minimal_degree(table, &support, config.max_mdeg, k, config.oversampling)?;
        steps.push((m, Step::Relation(d)));
        shapes.push(Shape { lead: m, support, mdeg: d, provenance });
    }
    Ok(SearchReport { shapes, staircase, steps, config: config.clone(), v0, p })
}

/// [`support_search`] on a freshly computed table of the right size.
pub fn support_search_knot(knot: TorusKnot, v0: u64, p: u64, config: &SearchConfig) -> Result<SearchReport> {
    let table = jones_table(knot, config.required_n_max(), &TableMode::Modular { v0, p })?;
    support_search(&table, config)
}

/// Checks that no relation with L-support `support` and M-degree at most
/// `mdeg` exists at the specialization `(v0, p)`; returns the kernel
/// dimension (zero means no relation).
pub fn negative_control(knot: TorusKnot, support: &[LMono], mdeg: u32, v0: u64, p: u64, oversampling: u32) -> Result<usize> {
    let st = StructureSet::dense(support, mdeg);
    check_order(v0, p, required_n_max(&st, oversampling))?;
    let table = jones_table(knot, required_n_max(&st, oversampling), &TableMode::Modular { v0, p })?;
    let prob = GuessProblem::new(&table, &st, oversampling)?;
    kernel_dimension(&prob)
}

/// Solves the dense ansatz of `shape` at each specialization and checks
/// that the kernels agree in dimension and vanishing pattern.
pub fn vanishing_pattern(knot: TorusKnot, shape: &Shape, specs: &[(u64, u64)], oversampling: u32) -> Result<Vec<bool>> {
    let st = shape.structure();
    let n = required_n_max(&st, oversampling);
    let mut pattern: Option<Vec<bool>> = None;
    for &(v0, p) in specs {
        check_order(v0, p, n)?;
        let table = jones_table(knot, n, &TableMode::Modular { v0, p })?;
        let r = guess(&table, &st, oversampling)?;
        let Some(pat) = r.pattern else {
            return Err(GuessError::Unlucky { v0, p, reason: format!("kernel dimension {}", r.kernel_dim) });
        };
        match &pattern {
            None => pattern = Some(pat),
            Some(prev) if *prev != pat => {
                return Err(GuessError::Unlucky { v0, p, reason: "vanishing pattern differs".into() });
            }
            _ => {}
        }
    }
    pattern.ok_or(GuessError::EmptyStructure)
}

/// Settings of the exact lift.
#[derive(Clone, Debug)]
pub struct LiftConfig {
    pub oversampling: u32,
    /// Specializations whose kernels fix the refined ansatz.
    pub pattern_specs: Vec<(u64, u64)>,
    /// Primes for the `q`-reconstruction, used in turn.
    pub primes: Vec<u64>,
    /// Samples per prime before giving up.
    pub max_samples: usize,
    pub seed: u64,
}

impl Default for LiftConfig {
    fn default() -> Self {
        Self {
            oversampling: DEFAULT_OVERSAMPLING,
            pattern_specs: vec![(DEFAULT_GUESS_V0, DEFAULT_PRIME), (7, 2_147_483_629)],
            primes: crate::arith::modp::primes_below_2_31().take(12).collect(),
            max_samples: 2000,
            seed: 0x5eed,
        }
    }
}

/// Result of verifying an operator on a region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub checked: usize,
    pub failures: Vec<(i64, i64, String)>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "checked: {}", self.checked)?;
        writeln!(f, "failures: {}", self.failures.len())?;
        for (a, b, why) in &self.failures {
            writeln!(f, "fail ({a}, {b}): {why}")?;
        }
        Ok(())
    }
}

/// A square region `[lo, hi]²` of indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Region {
    pub lo: i64,
    pub hi: i64,
}

impl Region {
    pub fn new(lo: i64, hi: i64) -> Self {
        Self { lo, hi }
    }

    pub fn points(&self) -> impl Iterator<Item = (i64, i64)> {
        let (lo, hi) = (self.lo, self.hi);
        (lo..=hi).flat_map(move |a| (lo..=hi).map(move |b| (a, b)))
    }
}

/// Applies `op` at every point of `region` and reports where it does not
/// vanish.
pub fn heldout_verify<O: SymbolicOracle + ?Sized>(op: &OreOp, f: &O, region: Region) -> VerifyReport {
    let mut rep = VerifyReport { checked: 0, failures: Vec::new() };
    for (a, b) in region.points() {
        rep.checked += 1;
        match ore_apply(op, f, a, b) {
            Ok(v) if v.is_zero() => {}
            Ok(_) => rep.failures.push((a, b, "nonzero".into())),
            Err(e) => rep.failures.push((a, b, e.to_string())),
        }
    }
    rep
}

/// [`heldout_verify`] at `q = q0` modulo a prime.
pub fn heldout_verify_mod<O: ModularOracle + ?Sized>(op: &OreOp, f: &O, q0: u64, fp: &PrimeField, region: Region) -> VerifyReport {
    let mut rep = VerifyReport { checked: 0, failures: Vec::new() };
    for (a, b) in region.points() {
        rep.checked += 1;
        match ore_apply_mod(op, f, q0, fp, a, b) {
            Ok(0) => {}
            Ok(_) => rep.failures.push((a, b, "nonzero".into())),
            Err(e) => rep.failures.push((a, b, e.to_string())),
        }
    }
    rep
}

/// Largest square region of `table` on which `op` can be applied.
pub fn full_region(op: &OreOp, table: &SequenceTable) -> Region {
    let s = op.support().iter().map(|m| m.0.max(m.1)).max().unwrap_or(0);
    Region::new(0, table.n_max() as i64 - s as i64)
}

/// An exact operator recovered from a shape.
#[derive(Clone, Debug)]
pub struct LiftResult {
    pub op: OreOp,
    pub unknowns: usize,
    pub primes_used: usize,
    pub verify: VerifyReport,
    pub modular_check: VerifyReport,
}

/// The refined structure, and for each L-monomial of it the positions of its
/// entries.
fn refined(shape: &Shape, pattern: &[bool]) -> Result<(StructureSet, Vec<(LMono, Vec<usize>)>)> {
    let st = shape.structure().restrict(pattern)?;
    let groups = st
        .l_support()
        .into_iter()
        .map(|l| (l, st.entries().iter().enumerate().filter(|(_, e)| (e.2, e.3) == l).map(|(i, _)| i).collect()))
        .collect();
    Ok((st, groups))
}

/// Solves the refined ansatz of `shape` exactly over `Q(q)`.
///
/// The unknowns that vanish at the pattern specializations are dropped. At
/// random `v0` the refined system has a one-dimensional kernel; normalizing
/// one unknown to 1 gives the coefficients as polynomials in `M` at
/// `q = v0^6`, from which the exact coefficients are reconstructed. The
/// result is made integral and checked against `symbolic` on the largest
/// region it covers (none of which was used for fitting), and modularly at a
/// fresh specialization on indices beyond the fitting grid.
pub fn exact_lift(knot: TorusKnot, shape: &Shape, symbolic: &SequenceTable, cfg: &LiftConfig) -> Result<LiftResult> {
    if *symbolic.mode() != TableMode::Symbolic {
        return Err(GuessError::WrongMode("symbolic"));
    }
    let pattern = vanishing_pattern(knot, shape, &cfg.pattern_specs, cfg.oversampling)?;
    let (st, groups) = refined(shape, &pattern)?;
    let n_max = required_n_max(&st, cfg.oversampling);
    let side = structure_grid_side(&st, cfg.oversampling);
    // normalize the highest M-term of the leading L-monomial
    let lead = TermOrder::deglex().max(st.l_support()).unwrap();
    let norm = groups.iter().find(|g| g.0 == lead).unwrap().1[0];
    let mut rng = rand::rngs::StdRng::seed_from_u64(cfg.seed);
    let sampler = |fp: &PrimeField, rng: &mut rand::rngs::StdRng| -> Option<(u64, Vec<(BiPoly, BiPoly)>)> {
        let v0 = rng.gen_range(2..fp.p() - 1);
        let q0 = fp.pow(v0, 6);
        if fp.order(q0) <= 2 * (n_max as u64 + 1) {
            return None;
        }
        let table = jones_table(knot, n_max, &TableMode::Modular { v0, p: fp.p() }).ok()?;
        let prob = GuessProblem { table: &table, structure: &st, points: grid_points(side) };
        let mut e = Echelon::new(fp.clone(), st.len());
        for r in prob.rows().ok()? {
            e.push_row(r);
        }
        let ker = e.kernel();
        if ker.len() != 1 || ker[0][norm] == 0 {
            return None;
        }
        let inv = fp.inv(ker[0][norm]).unwrap();
        let imgs = groups
            .iter()
            .map(|(_, idx)| {
                let terms = idx.iter().map(|&i| {
                    let (a1, a2, _, _) = st.entries()[i];
                    (a1 as usize, a2 as usize, fp.mul(ker[0][i], inv))
                });
                (BiPoly::from_terms(fp, terms), BiPoly::constant(1))
            })
            .collect();
        Some((q0, imgs))
    };
    let funcs = recon::reconstruct_functions(groups.len(), &cfg.primes, recon::DEFAULT_SLACK, cfg.max_samples, sampler, &mut rng)
        .map_err(|e| match e {
            ReconError::Integers(_) => GuessError::Spurious(format_support(&shape.support)),
            e => GuessError::Recon(e),
        })?;
    let op = Ore::from_terms(&ExactField, groups.iter().map(|g| g.0).zip(funcs)).integral(&TermOrder::deglex())?;

    // modular check beyond the fitting grid, at a fresh specialization
    let fp = PrimeField::new(DEFAULT_PRIME).unwrap();
    let v0 = 5;
    let q0 = fp.pow(v0, 6);
    let lo = side as i64;
    let region = Region::new(lo, lo + 8);
    let table = jones_table(knot, (region.hi + 5) as u32, &TableMode::Modular { v0, p: fp.p() })?;
    let modular_check = heldout_verify_mod(&op, &table, q0, &fp, region);
    let verify = heldout_verify(&op, symbolic, full_region(&op, symbolic));
    if !modular_check.passed() || !verify.passed() {
        return Err(GuessError::Unverified(modular_check.failures.len() + verify.failures.len()));
    }
    Ok(LiftResult { op, unknowns: st.len(), primes_used: cfg.primes.len(), verify, modular_check })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_operator;

    fn const_table(n: u32) -> SequenceTable {
        SequenceTable::from_modular_fn(TorusKnot::new(1).unwrap(), n, 2, DEFAULT_PRIME, |_, _| 1)
    }

    #[test]
    fn constant_sequence_rows() {
        let t = const_table(5);
        let st = StructureSet::new(vec![(0, 0, 0, 0), (0, 0, 1, 0)]).unwrap();
        let prob = GuessProblem::new(&t, &st, 20).unwrap();
        let rows = build_system(&prob).unwrap();
        assert!(rows.iter().all(|r| r == &vec![1, 1]));
        let fp = PrimeField::default_field();
        let ker = modular_kernel(&fp, 2, &rows[..1]);
        assert_eq!(ker, vec![vec![DEFAULT_PRIME - 1, 1]]);
    }

    #[test]
    fn identity_has_empty_kernel() {
        let fp = PrimeField::default_field();
        assert!(modular_kernel(&fp, 2, &[vec![1, 0], vec![0, 1]]).is_empty());
    }

    #[test]
    fn single_point_gives_rank_one() {
        let t = jones_table(TorusKnot::trefoil(), 8, &TableMode::Modular { v0: 2, p: DEFAULT_PRIME }).unwrap();
        let st = StructureSet::dense(&[(0, 0), (1, 0), (0, 1)], 2);
        let prob = GuessProblem { table: &t, structure: &st, points: vec![(3, 4)] };
        let rows = build_system(&prob).unwrap();
        let fp = PrimeField::default_field();
        assert_eq!(crate::linalg::rank(&fp, st.len(), rows), 1);
    }

    #[test]
    fn missing_entries_are_reported() {
        let t = const_table(3);
        let st = StructureSet::dense(&[(0, 0), (1, 0)], 4);
        assert!(matches!(GuessProblem::new(&t, &st, 20), Err(GuessError::InsufficientData { .. })));
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(equations_needed(100, 20), 120);
        assert_eq!(equations_needed(7, 20), 9);
        assert_eq!(grid_side(120), 11);
        assert_eq!(grid_side(121), 11);
        assert_eq!(grid_points(2), vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
    }

    #[test]
    fn constant_sequence_search() {
        let t = const_table(20);
        let cfg = SearchConfig { max_ldeg: 1, max_mdeg: 2, ..Default::default() };
        let r = support_search(&t, &cfg).unwrap();
        assert_eq!(r.shapes[0].support, vec![(0, 0), (0, 1)]);
        assert_eq!(r.shapes[0].mdeg, 0);
        let cfg = SearchConfig { precedence: Precedence::L2First, ..cfg };
        let r = support_search(&t, &cfg).unwrap();
        assert_eq!(r.shapes[0].support, vec![(0, 0), (1, 0)]);
    }

    #[test]
    fn verification_of_trivial_operators() {
        let one = crate::jones::SequenceTable::from_symbolic_fn(TorusKnot::new(1).unwrap(), 6, |_, _| {
            crate::arith::qlaurent::QLaurent::one()
        });
        let good = parse_operator("L1 - 1").unwrap();
        let bad = parse_operator("L1 - 2").unwrap();
        assert!(heldout_verify(&good, &one, Region::new(0, 5)).passed());
        let r = heldout_verify(&bad, &one, Region::new(0, 5));
        assert_eq!(r.failures.len(), 36);
    }

    #[test]
    fn triangular_roots() {
        assert_eq!(triangular_root(1), Some(1));
        assert_eq!(triangular_root(6), Some(3));
        assert_eq!(triangular_root(28), Some(7));
        assert_eq!(triangular_root(5), None);
    }

    #[test]
    fn deglex_search_order() {
        let cfg = SearchConfig { max_ldeg: 2, ..Default::default() };
        assert_eq!(cfg.monomials(), vec![(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]);
    }
}
