//! The trefoil computation as one run: sequence table, support search,
//! exact lifts, Groebner basis, lex basis, fan, tau-symmetry, q = 1 images,
//! diagonal recurrence and the TQFT normalization.
//!
//! Every stage records its checks in a [`Manifest`]; the run produces a
//! [`Bundle`] of text artifacts (operators, fan, images) whose hashes go into
//! the manifest as well.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::arith::modp::{PrimeField, DEFAULT_PRIME};
use crate::format::{fmt_l_monomial, parse_operator, serialize_operator};
use crate::golden::{self, GoldenSet};
use crate::groebner::fan::{cone_leads, groebner_fan, interior_rays, is_swap_symmetric, Ray};
use crate::groebner::order::{divides, LMono, TermOrder};
use crate::groebner::{buchberger, fglm, normal_form, s_pairs_reduce_to_zero, staircase, support_relation, ReducedGb};
use crate::guess::{
    exact_lift, full_region, heldout_verify, heldout_verify_mod, negative_control, support_search_knot, LiftConfig,
    Region, SearchConfig, SearchReport, Shape, DEFAULT_GUESS_V0,
};
use crate::jones::{jones_table, SequenceTable, TableCache, TableMode, TorusKnot};
use crate::lattice_gb::{self, image, images, monic_image, random_lattice, LatticeOp, ReconConfig};
use crate::manifest::Manifest;
use crate::ore::epsilon::epsilon_q1;
use crate::ore::lattice::LatticeField;
use crate::ore::transport::{conjugate_transport, tqft_factor, Direction};
use crate::ore::{ore_apply, CoeffField, ExactField, OreOp};

/// The staircase of the annihilator under deglex.
pub const STAIRCASE: [LMono; 5] = [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1)];
/// Leading monomials and minimal M-degrees of P1, P2, P3.
pub const SHAPES: [(LMono, u32); 3] = [((2, 0), 23), ((0, 3), 28), ((1, 2), 27)];
pub const FAN_RAYS: [Ray; 5] = [(4, 1), (2, 1), (1, 1), (1, 2), (1, 4)];
/// Support of the diagonal recurrence.
pub const DIAGONAL: [LMono; 5] = [(0, 0), (1, 1), (2, 2), (3, 3), (4, 4)];
/// The support the negative control rules out.
pub const NEGATIVE_SUPPORT: [LMono; 5] = [(0, 0), (1, 0), (0, 1), (1, 1), (0, 2)];

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub search: SearchConfig,
    pub guess_v0: u64,
    pub prime: u64,
    pub lift: LiftConfig,
    /// Size of the symbolic table the lifts are verified on.
    pub lift_table: u32,
    pub recon: ReconConfig,
    /// Independent lattices for the Groebner checks.
    pub check_lattices: usize,
    pub lattice_side: usize,
    /// M-degree bound of the negative control; `None` skips it.
    pub negative_control: Option<u32>,
    pub golden_symbolic: u32,
    pub golden_modular: u32,
    pub golden_specs: Vec<(u64, u64)>,
    pub diag_max: u32,
    pub transport: Vec<i64>,
    pub transport_max: u32,
    pub cache: Option<PathBuf>,
    /// Run the remaining stages after a failed check.
    pub keep_going: bool,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            guess_v0: DEFAULT_GUESS_V0,
            prime: DEFAULT_PRIME,
            lift: LiftConfig::default(),
            lift_table: 12,
            recon: ReconConfig::default(),
            check_lattices: 3,
            lattice_side: 72,
            negative_control: Some(60),
            golden_symbolic: 15,
            golden_modular: 25,
            golden_specs: vec![(2, DEFAULT_PRIME), (3, DEFAULT_PRIME)],
            diag_max: 15,
            transport: vec![0, 3],
            transport_max: 12,
            cache: None,
            keep_going: false,
            seed: 7,
        }
    }
}

fn parse_list<T: std::str::FromStr>(v: &str) -> Result<Vec<T>, String> {
    v.split(',').map(|s| s.trim().parse().map_err(|_| format!("bad list entry {s:?}"))).collect()
}

impl PipelineConfig {
    /// Sets one option by name; used for config files and `--set` flags.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        let num = |v: &str| v.parse::<u64>().map_err(|_| format!("{key}: expected a number, got {v:?}"));
        let flag = |v: &str| match v {
            "true" | "on" | "yes" => Ok(true),
            "false" | "off" | "no" => Ok(false),
            _ => Err(format!("{key}: expected true or false, got {v:?}")),
        };
        match key {
            "guess_v0" => self.guess_v0 = num(v)?,
            "prime" => self.prime = num(v)?,
            "max_ldeg" => self.search.max_ldeg = num(v)? as u32,
            "max_mdeg" => self.search.max_mdeg = num(v)? as u32,
            "oversampling" => {
                self.search.oversampling = num(v)? as u32;
                self.lift.oversampling = self.search.oversampling;
            }
            "lift_table" => self.lift_table = num(v)? as u32,
            "check_lattices" => self.check_lattices = num(v)? as usize,
            "lattice_side" => self.lattice_side = num(v)? as usize,
            "negative_control" => {
                self.negative_control = if flag(v) == Ok(false) { None } else { Some(num(v)? as u32) }
            }
            "golden_symbolic" => self.golden_symbolic = num(v)? as u32,
            "golden_modular" => self.golden_modular = num(v)? as u32,
            "diag_max" => self.diag_max = num(v)? as u32,
            "transport" => self.transport = if v.is_empty() { Vec::new() } else { parse_list(v)? },
            "transport_max" => self.transport_max = num(v)? as u32,
            "cache" => self.cache = Some(PathBuf::from(v)),
            "keep_going" => self.keep_going = flag(v)?,
            "seed" => self.seed = num(v)?,
            _ => return Err(format!("unknown option {key:?}")),
        }
        Ok(())
    }

    /// Reads `key = value` lines; `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self, String> {
        let mut c = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
            c.apply(k.trim(), v).map_err(|e| format!("line {}: {e}", i + 1))?;
        }
        Ok(c)
    }

    fn record(&self, m: &mut Manifest) {
        m.param("guess_v0", self.guess_v0);
        m.param("prime", self.prime);
        m.param("max_ldeg", self.search.max_ldeg);
        m.param("max_mdeg", self.search.max_mdeg);
        m.param("oversampling", self.search.oversampling);
        m.param("lift_table", self.lift_table);
        m.param("check_lattices", self.check_lattices);
        m.param("lattice_side", self.lattice_side);
        m.param("negative_control", self.negative_control.map_or("off".to_string(), |d| d.to_string()));
        m.param("golden_symbolic", self.golden_symbolic);
        m.param("golden_modular", self.golden_modular);
        let specs: Vec<String> = self.golden_specs.iter().map(|(v, p)| format!("{v}/{p}")).collect();
        m.param("golden_specs", specs.join(","));
        m.param("diag_max", self.diag_max);
        let cs: Vec<String> = self.transport.iter().map(|c| c.to_string()).collect();
        m.param("transport", cs.join(","));
        m.param("transport_max", self.transport_max);
        m.param("seed", self.seed);
    }
}

/// Table integrity: integral in `q`, symmetric, `f(0, 0) = 1`; for the
/// unknot every value is 1. Returns the offending entries.
pub fn table_integrity(table: &SequenceTable) -> Vec<String> {
    let n = table.n_max();
    let mut bad = Vec::new();
    for a in 0..=n {
        for b in 0..=n {
            let Some(x) = table.symbolic(a, b) else {
                bad.push(format!("({a}, {b}): missing"));
                continue;
            };
            if !x.is_integral_in_q() {
                bad.push(format!("({a}, {b}): not integral in q"));
            }
            if table.symbolic(b, a) != Some(x) {
                bad.push(format!("({a}, {b}): not symmetric"));
            }
            if ((a, b) == (0, 0) || table.knot().b() == 1) && !x.is_one() {
                bad.push(format!("({a}, {b}): expected 1"));
            }
        }
    }
    bad
}

/// No term of a generator is divisible by the leading monomial of another
/// (the exact part of reducedness; leading coefficients are normalized
/// away by the monic form).
pub fn support_reduced(gens: &[OreOp], order: &TermOrder) -> bool {
    let leads: Vec<LMono> = gens.iter().map(|g| g.lead_monomial(order).unwrap()).collect();
    gens.iter().enumerate().all(|(k, g)| {
        g.support().iter().all(|&m| leads.iter().enumerate().all(|(i, &l)| i == k || !divides(l, m)))
    })
}

/// The diagonal relation as a recurrence in `n`: for each `k`, the
/// coefficient of `f(n + k, n + k)` with `M1 = M2 = x` standing for `q^n`.
pub fn diagonal_recurrence(op: &OreOp) -> Vec<(u32, crate::arith::ratfunc::RatFuncQMM)> {
    let diag = |p: &crate::arith::mpoly::MPolyQMM| p.map_exponents(|(a, b, c)| (a, b + c, 0));
    op.terms()
        .iter()
        .filter(|(m, _)| m.0 == m.1)
        .map(|(m, c)| (m.0, crate::arith::ratfunc::RatFuncQMM::canonical(diag(c.num()), diag(c.den())).unwrap()))
        .collect()
}

/// Operators stored between runs.
#[derive(Clone, Debug)]
pub struct OpCache {
    dir: PathBuf,
}

impl OpCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into().join("ops") }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.ops"))
    }

    pub fn load(&self, name: &str) -> Option<Vec<OreOp>> {
        let text = std::fs::read_to_string(self.path(name)).ok()?;
        text.split("\n\n").filter(|b| !b.trim().is_empty()).map(|b| parse_operator(b).ok()).collect()
    }

    pub fn store(&self, name: &str, ops: &[OreOp]) {
        let text: Vec<String> = ops.iter().map(serialize_operator).collect();
        if std::fs::create_dir_all(&self.dir).is_ok() {
            let _ = std::fs::write(self.path(name), text.join("\n"));
        }
    }
}

/// Everything a run produces.
#[derive(Clone, Debug, Default)]
pub struct Bundle {
    pub manifest: Manifest,
    /// Artifact name to contents.
    pub files: BTreeMap<String, String>,
    pub search: Option<SearchReport>,
    /// P1, P2, P3 in integral form.
    pub p: Vec<OreOp>,
    /// Q1, Q2 in integral form.
    pub q: Vec<OreOp>,
    pub diagonal: Option<OreOp>,
    pub rays: Vec<Ray>,
    /// Unknown factors of the golden skeletons, recovered from the lifts.
    pub factors: HashMap<String, crate::arith::mpoly::MPolyQMM>,
    /// Why the run stopped early, if it did.
    pub aborted: Option<String>,
}

impl Bundle {
    pub fn ok(&self) -> bool {
        self.aborted.is_none() && self.manifest.ok()
    }

    fn file(&mut self, name: &str, text: String) {
        self.manifest.output(name, &text);
        self.files.insert(name.to_string(), text);
    }

    /// Writes the artifacts and the manifest into `dir`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, text) in &self.files {
            std::fs::write(dir.join(name), text)?;
        }
        std::fs::write(dir.join("manifest.txt"), self.manifest.to_string())
    }
}

/// Outcome of the checks on one lattice.
#[derive(Clone, Debug, Default)]
struct LatticeRun {
    unchanged: bool,
    s_pairs: bool,
    staircase: Vec<LMono>,
    lex_supports: Vec<Vec<LMono>>,
    lex_agrees: bool,
    mutual_nf: bool,
    tau_deglex: bool,
    tau_lex: bool,
    rays: Vec<Ray>,
    cone_leads: Vec<Vec<LMono>>,
}

fn same(lf: &LatticeField, a: &LatticeOp, b: &LatticeOp) -> bool {
    a.support() == b.support()
        && a.terms().iter().all(|(m, c)| b.coeff(*m).is_some_and(|d| lf.is_zero(&lf.sub(c, d))))
}

fn lattice_run(lf: &LatticeField, p: &[OreOp], q: &[OreOp]) -> lattice_gb::Result<LatticeRun> {
    let deglex = TermOrder::deglex();
    let lex = TermOrder::lex();
    let imgs = images(lf, p)?;
    let gb = buchberger(lf, &imgs, deglex)?;
    let mut monic = p.iter().map(|g| monic_image(lf, g, &deglex)).collect::<lattice_gb::Result<Vec<_>>>()?;
    monic.sort_by(|a, b| deglex.cmp(a.lead_monomial(&deglex).unwrap(), b.lead_monomial(&deglex).unwrap()));
    let unchanged = gb.gens().len() == monic.len() && gb.gens().iter().zip(&monic).all(|(a, b)| same(lf, a, b));
    let s_pairs = s_pairs_reduce_to_zero(lf, gb.gens(), &deglex);
    let staircase = staircase(&gb)?.monomials;
    let lexgb = fglm(lf, &gb, lex)?;
    let lex_supports = lexgb.gens().iter().map(|g| g.support()).collect();
    let lex_agrees =
        lexgb.gens().len() == q.len() && q.iter().zip(lexgb.gens()).all(|(e, l)| lattice_gb::agrees(lf, e, l, &lex));
    let qimgs = q.iter().map(|g| monic_image(lf, g, &lex)).collect::<lattice_gb::Result<Vec<_>>>()?;
    let mutual_nf = imgs.iter().all(|g| normal_form(lf, g, &qimgs, &lex).is_zero())
        && qimgs.iter().all(|g| normal_form(lf, g, gb.gens(), &deglex).is_zero());
    let mut tau_deglex = true;
    for g in p {
        tau_deglex &= normal_form(lf, &image(lf, &g.tau(&ExactField))?, gb.gens(), &deglex).is_zero();
    }
    let mut tau_lex = true;
    for g in q {
        tau_lex &= normal_form(lf, &image(lf, &g.tau(&ExactField))?, lexgb.gens(), &lex).is_zero();
    }
    let fan = groebner_fan(lf, &gb)?;
    Ok(LatticeRun {
        unchanged,
        s_pairs,
        staircase,
        lex_supports,
        lex_agrees,
        mutual_nf,
        tau_deglex,
        tau_lex,
        rays: interior_rays(&fan),
        cone_leads: cone_leads(&fan),
    })
}


fn fmt_rays(r: &[Ray]) -> String {
    r.iter().map(|(a, b)| format!("({a},{b})")).collect::<Vec<_>>().join(" ")
}

/// Runs the trefoil computation.
pub struct Pipeline {
    pub config: PipelineConfig,
    golden: GoldenSet,
    bundle: Bundle,
    rng: StdRng,
}

macro_rules! stage {
    ($self:ident, $name:expr, $body:expr) => {{
        let t = Instant::now();
        info!("stage {}", $name);
        let r: Result<(), String> = $body;
        $self.bundle.manifest.time($name, t.elapsed());
        if let Err(e) = r {
            $self.bundle.manifest.check(&format!("{}.completed", $name), false);
            $self.bundle.manifest.set(&format!("error.{}", $name), &e);
            $self.bundle.aborted = Some(format!("{}: {e}", $name));
            return $self.finish();
        }
        if !$self.config.keep_going && !$self.bundle.manifest.ok() {
            let failed = $self.bundle.manifest.failed_checks().join(", ");
            $self.bundle.aborted = Some(format!("{}: failed {failed}", $name));
            return $self.finish();
        }
    }};
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self, String> {
        let golden = GoldenSet::load().map_err(|e| e.to_string())?;
        let mut manifest = Manifest::new("pipeline");
        config.record(&mut manifest);
        for (n, t) in [
            ("golden/P1.ops", golden::P1_TEXT),
            ("golden/F.polys", golden::F_TEXT),
            ("golden/eps.polys", golden::EPS_TEXT),
            ("golden/P2.skel", golden::P2_SKEL),
            ("golden/P3.skel", golden::P3_SKEL),
            ("golden/Q1.skel", golden::Q1_SKEL),
            ("golden/Q2.skel", golden::Q2_SKEL),
        ] {
            manifest.input(n, t);
        }
        let rng = StdRng::seed_from_u64(config.seed);
        Ok(Self { config, golden, bundle: Bundle { manifest, ..Default::default() }, rng })
    }

    fn m(&mut self) -> &mut Manifest {
        &mut self.bundle.manifest
    }

    fn table(&self, n: u32, mode: &TableMode) -> Result<SequenceTable, String> {
        let k = TorusKnot::trefoil();
        match &self.config.cache {
            Some(dir) => TableCache::new(dir).table(k, n, mode),
            None => jones_table(k, n, mode),
        }
        .map_err(|e| e.to_string())
    }

    fn ops_cache(&self) -> Option<OpCache> {
        self.config.cache.as_ref().map(OpCache::new)
    }

    /// Runs every stage; stops at the first failed check unless
    /// `keep_going` is set.
    pub fn run(mut self) -> Bundle {
        let c = &self.config;
        let n_sym = (c.golden_symbolic + 2).max(c.diag_max + 4).max(c.transport_max + 3).max(c.lift_table);
        let mut sym = SequenceTable::from_symbolic_fn(TorusKnot::trefoil(), 0, |_, _| crate::arith::qlaurent::QLaurent::one());
        stage!(self, "tables", {
            self.table(n_sym, &TableMode::Symbolic).map(|t| {
                sym = t;
                let bad = table_integrity(&sym);
                self.m().set("tables.symbolic_n_max", n_sym);
                self.m().check("tables.integrity", bad.is_empty());
            })
        });
        stage!(self, "golden", self.stage_golden(&sym));
        stage!(self, "search", self.stage_search());
        stage!(self, "lift", self.stage_lift(&sym));
        stage!(self, "gb", self.stage_gb());
        stage!(self, "lex", self.stage_lex());
        stage!(self, "lattice_checks", self.stage_lattice_checks());
        stage!(self, "eps", self.stage_eps());
        stage!(self, "skeletons", self.stage_skeletons());
        stage!(self, "diagonal", self.stage_diagonal(&sym));
        stage!(self, "transport", self.stage_transport(&sym));
        self.finish()
    }

    fn finish(mut self) -> Bundle {
        if let Some(a) = self.bundle.aborted.clone() {
            self.m().set("aborted", a);
        }
        self.bundle
    }

    fn stage_golden(&mut self, sym: &SequenceTable) -> Result<(), String> {
        let p1 = self.golden.p1.clone();
        let s = self.config.golden_symbolic as i64;
        let r = heldout_verify(&p1, sym, Region::new(0, s));
        self.m().set("golden.symbolic_points", r.checked);
        self.m().check("golden.p1_symbolic", r.passed());
        let hi = self.config.golden_modular;
        for (v0, p) in self.config.golden_specs.clone() {
            let fp = PrimeField::new(p).map_err(|e| e.to_string())?;
            let t = self.table(hi + 2, &TableMode::Modular { v0, p })?;
            let r = heldout_verify_mod(&p1, &t, fp.pow(v0, 6), &fp, Region::new(0, hi as i64));
            self.m().set(&format!("golden.modular_points.{v0}_{p}"), r.checked);
            self.m().check(&format!("golden.p1_modular.{v0}_{p}"), r.passed());
        }
        let tau = p1.tau(&ExactField) == p1.neg(&ExactField);
        self.m().check("golden.p1_tau_antisymmetric", tau);
        Ok(())
    }

    fn stage_search(&mut self) -> Result<(), String> {
        let c = self.config.clone();
        let rep = support_search_knot(TorusKnot::trefoil(), c.guess_v0, c.prime, &c.search).map_err(|e| e.to_string())?;
        let found: Vec<(LMono, u32)> = rep.shapes.iter().map(|s| (s.lead, s.mdeg)).collect();
        for s in &rep.shapes {
            self.m().set(&format!("search.{}", fmt_l_monomial(s.lead.0, s.lead.1)), format!("support {} mdeg {}", crate::guess::format_support(&s.support), s.mdeg));
        }
        let mut stair = rep.staircase.clone();
        stair.sort();
        self.m().set("search.staircase", crate::guess::format_support(&stair));
        self.m().check("search.shapes", found == SHAPES);
        self.m().check("search.staircase", stair == STAIRCASE);
        if let Some(d) = c.negative_control {
            let k = negative_control(TorusKnot::trefoil(), &NEGATIVE_SUPPORT, d, c.guess_v0, c.prime, c.search.oversampling)
                .map_err(|e| e.to_string())?;
            self.m().set("search.negative_control_kernel", k);
            self.m().check("search.negative_control", k == 0);
        }
        self.bundle.file("search.txt", rep.to_string());
        self.bundle.search = Some(rep);
        Ok(())
    }

    fn lift_one(&mut self, shape: &Shape, sym: &SequenceTable) -> Result<OreOp, String> {
        let name = format!("lift-{}-{}-{}-{}", shape.lead.0, shape.lead.1, shape.mdeg, self.config.guess_v0);
        let verify = |op: &OreOp| heldout_verify(op, sym, full_region(op, sym));
        if let Some(op) = self.ops_cache().and_then(|c| c.load(&name)).and_then(|v| v.into_iter().next()) {
            let r = verify(&op);
            let support: BTreeSet<LMono> = shape.support.iter().copied().collect();
            if r.passed() && op.support().into_iter().collect::<BTreeSet<_>>() == support {
                self.m().set(&format!("lift.{name}"), format!("cached, re-verified at {} points", r.checked));
                return Ok(op);
            }
        }
        let r = exact_lift(TorusKnot::trefoil(), shape, sym, &self.config.lift).map_err(|e| e.to_string())?;
        self.m().set(
            &format!("lift.{name}"),
            format!("unknowns {}, verified at {} + {} points", r.unknowns, r.verify.checked, r.modular_check.checked),
        );
        if let Some(c) = self.ops_cache() {
            c.store(&name, std::slice::from_ref(&r.op));
        }
        Ok(r.op)
    }

    fn stage_lift(&mut self, sym: &SequenceTable) -> Result<(), String> {
        let shapes = self.bundle.search.as_ref().map(|r| r.shapes.clone()).unwrap_or_default();
        let small = sym.restrict(self.config.lift_table);
        for s in &shapes {
            let op = self.lift_one(s, &small)?;
            self.bundle.p.push(op);
        }
        let count = self.bundle.p.len();
        self.m().check("lift.count", count == 3);
        for (i, op) in self.bundle.p.clone().iter().enumerate() {
            let (dq, dm) = op.degrees();
            self.m().set(&format!("lift.P{}.degrees", i + 1), format!("q {dq} M {dm}"));
            self.bundle.file(&format!("P{}.ops", i + 1), serialize_operator(op));
        }
        if let Some(p1) = self.bundle.p.first() {
            let o = TermOrder::deglex();
            let eq = p1.monic(&ExactField, &o).ok() == self.golden.p1.monic(&ExactField, &o).ok();
            self.m().check("lift.P1_equals_golden", eq);
        }
        Ok(())
    }

    fn stage_gb(&mut self) -> Result<(), String> {
        let o = TermOrder::deglex();
        let p = self.bundle.p.clone();
        let mut leads: Vec<LMono> = p.iter().map(|g| g.lead_monomial(&o).unwrap()).collect();
        leads.sort();
        self.m().set("gb.leads", crate::guess::format_support(&leads));
        self.m().check("gb.reduced_exact", support_reduced(&p, &o));
        let st = crate::groebner::staircase_of(&leads).map_err(|e| e.to_string())?;
        self.m().set("gb.staircase", crate::guess::format_support(&st.monomials));
        self.m().set("gb.rank", st.rank());
        let mut sorted = st.monomials.clone();
        sorted.sort();
        self.m().check("gb.staircase", sorted == STAIRCASE && st.rank() == 5);
        Ok(())
    }

    fn stage_lex(&mut self) -> Result<(), String> {
        let p = self.bundle.p.clone();
        let compute = |lf: &LatticeField| -> Option<Vec<LatticeOp>> {
            let gb = ReducedGb::from_reduced(lf, images(lf, &p).ok()?, TermOrder::deglex()).ok()?;
            Some(fglm(lf, &gb, TermOrder::lex()).ok()?.into_gens())
        };
        let q = self.reconstruct("lex", TermOrder::lex(), compute)?;
        for (i, g) in q.iter().enumerate() {
            self.m().set(&format!("lex.Q{}.support", i + 1), crate::guess::format_support(&g.support()));
            self.bundle.file(&format!("Q{}.ops", i + 1), serialize_operator(g));
        }
        let want: Vec<Vec<LMono>> = ["Q1", "Q2"].iter().map(|n| self.golden.skeleton(n).support()).collect();
        let got: Vec<Vec<LMono>> = q.iter().map(|g| g.support()).collect();
        self.m().check("lex.count", q.len() == 2);
        self.m().check("lex.supports", got == want);
        self.bundle.q = q;
        Ok(())
    }

    /// Exact operators from lattice runs, with a cache keyed by `name`.
    fn reconstruct<C>(&mut self, name: &str, order: TermOrder, mut compute: C) -> Result<Vec<OreOp>, String>
    where
        C: FnMut(&LatticeField) -> Option<Vec<LatticeOp>>,
    {
        let key = format!("{name}-{}", self.config.guess_v0);
        if let Some(ops) = self.ops_cache().and_then(|c| c.load(&key)) {
            // held-out lattices must agree with the cached operators
            let fp = PrimeField::new(self.config.prime).map_err(|e| e.to_string())?;
            let mut ok = true;
            for _ in 0..2 {
                let lf = random_lattice(&fp, &mut self.rng, self.config.lattice_side, false);
                ok &= match compute(&lf) {
                    Some(l) => l.len() == ops.len() && ops.iter().zip(&l).all(|(e, x)| lattice_gb::agrees(&lf, e, x, &order)),
                    None => false,
                };
            }
            if ok {
                self.m().set(&format!("{name}.source"), "cached, re-checked on 2 lattices");
                return Ok(ops);
            }
        }
        let ops = lattice_gb::reconstruct_ops(order, &self.config.recon, compute).map_err(|e| e.to_string())?;
        self.m().set(&format!("{name}.source"), "reconstructed");
        if let Some(c) = self.ops_cache() {
            c.store(&key, &ops);
        }
        Ok(ops)
    }

    fn stage_lattice_checks(&mut self) -> Result<(), String> {
        let fp = PrimeField::new(self.config.prime).map_err(|e| e.to_string())?;
        let (p, q) = (self.bundle.p.clone(), self.bundle.q.clone());
        let mut runs = Vec::new();
        let mut tries = 0;
        while runs.len() < self.config.check_lattices {
            tries += 1;
            if tries > 3 * self.config.check_lattices + 3 {
                return Err("too many unlucky lattices".into());
            }
            let lf = random_lattice(&fp, &mut self.rng, self.config.lattice_side, false);
            match lattice_run(&lf, &p, &q) {
                Ok(r) => runs.push(r),
                Err(e) => info!("unlucky lattice: {e}"),
            }
        }
        self.m().set("lattice.runs", runs.len());
        self.m().set("lattice.unlucky", tries - runs.len());
        let all = |f: &dyn Fn(&LatticeRun) -> bool| runs.iter().all(f);
        let first = runs[0].clone();
        let mut stair = first.staircase.clone();
        stair.sort();
        let want_lex: Vec<Vec<LMono>> = ["Q1", "Q2"].iter().map(|n| self.golden.skeleton(n).support()).collect();
        let checks = [
            ("gb.buchberger_unchanged", all(&|r| r.unchanged)),
            ("gb.s_pairs_reduce", all(&|r| r.s_pairs)),
            ("gb.staircase_lattice", all(&|r| r.staircase == first.staircase) && stair == STAIRCASE),
            ("lex.fglm_supports", all(&|r| r.lex_supports == want_lex)),
            ("lex.agrees_with_fglm", all(&|r| r.lex_agrees)),
            ("lex.mutual_normal_forms", all(&|r| r.mutual_nf)),
            ("tau.deglex_basis", all(&|r| r.tau_deglex)),
            ("tau.lex_basis", all(&|r| r.tau_lex)),
            ("fan.rays", all(&|r| r.rays == FAN_RAYS)),
            ("fan.swap_symmetric", all(&|r| is_swap_symmetric(&r.rays))),
        ];
        for (n, ok) in checks {
            self.m().check(n, ok);
        }
        let p1 = self.bundle.p.first().cloned();
        if let Some(p1) = p1 {
            self.m().check("tau.p1_antisymmetric", p1.tau(&ExactField) == p1.neg(&ExactField));
        }
        let mut fan = String::new();
        writeln!(fan, "rays: {}", fmt_rays(&first.rays)).unwrap();
        let mut lower = "(1,0)".to_string();
        for (i, leads) in first.cone_leads.iter().enumerate() {
            let upper = first.rays.get(i).map_or("(0,1)".to_string(), |r| format!("({},{})", r.0, r.1));
            writeln!(fan, "cone {lower}..{upper}: leads {}", crate::guess::format_support(leads)).unwrap();
            lower = upper;
        }
        self.m().set("fan.rays", fmt_rays(&first.rays));
        self.bundle.rays = first.rays.clone();
        self.bundle.file("fan.txt", fan);
        self.bundle.file("staircase.txt", staircase_picture(&first.staircase, &first.cone_leads.first().cloned().unwrap_or_default()));
        Ok(())
    }

    fn stage_eps(&mut self) -> Result<(), String> {
        let mut text = String::new();
        let ops: Vec<(String, OreOp)> = (self.bundle.p.iter().enumerate().map(|(i, g)| (format!("p{}", i + 1), g.clone())))
            .chain(self.bundle.q.iter().enumerate().map(|(i, g)| (format!("q{}", i + 1), g.clone())))
            .collect();
        for (name, op) in ops {
            let e = epsilon_q1(&op).map_err(|e| e.to_string())?;
            let ok = self.golden.eps.get(&name).is_some_and(|g| e.matches_up_to_m_content(g));
            self.m().check(&format!("eps.{name}"), ok);
            writeln!(text, "{name} = {}", e.normalized()).unwrap();
        }
        self.bundle.file("eps.polys", text);
        Ok(())
    }

    fn stage_skeletons(&mut self) -> Result<(), String> {
        let ops: Vec<(&str, OreOp)> = vec![
            ("P2", self.bundle.p.get(1).cloned().ok_or("P2 missing")?),
            ("P3", self.bundle.p.get(2).cloned().ok_or("P3 missing")?),
            ("Q1", self.bundle.q.first().cloned().ok_or("Q1 missing")?),
            ("Q2", self.bundle.q.get(1).cloned().ok_or("Q2 missing")?),
        ];
        let mut found = HashMap::new();
        for (name, op) in ops {
            let r = self.golden.match_skeleton(&op, name, &mut found);
            self.m().set(&format!("skeleton.{name}.known_factors"), r.known_factors);
            for f in &r.failures {
                info!("skeleton {name}: {f}");
            }
            self.m().check(&format!("skeleton.{name}"), r.support_matches && r.passed());
        }
        let mut names: Vec<&String> = found.keys().collect();
        names.sort_by_key(|n| (n.len(), n.to_string()));
        let mut text = String::new();
        for n in &names {
            writeln!(text, "{n} = {}", found[*n]).unwrap();
        }
        self.m().set("skeleton.recovered_factors", names.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(","));
        self.bundle.file("factors.polys", text);
        self.bundle.factors = found;
        Ok(())
    }

    fn stage_diagonal(&mut self, sym: &SequenceTable) -> Result<(), String> {
        let p = self.bundle.p.clone();
        let compute = |lf: &LatticeField| -> Option<Vec<LatticeOp>> {
            let gb = ReducedGb::from_reduced(lf, images(lf, &p).ok()?, TermOrder::deglex()).ok()?;
            Some(vec![support_relation(lf, &gb, &DIAGONAL).ok()??])
        };
        let r = self.reconstruct("diagonal", TermOrder::deglex(), compute)?.remove(0);
        let order = r.support().iter().map(|m| m.0).max().unwrap_or(0);
        self.m().set("diagonal.order", order);
        self.m().check("diagonal.order_4", r.support() == DIAGONAL);
        self.m().check("diagonal.tau_symmetric", r.tau(&ExactField) == r);
        let hi = self.config.diag_max as i64;
        let mut bad = 0;
        for n in 0..=hi {
            if !ore_apply(&r, sym, n, n).map(|v| v.is_zero()).unwrap_or(false) {
                bad += 1;
            }
        }
        self.m().check("diagonal.annihilates", bad == 0);
        let mut text = serialize_operator(&r);
        text.push_str("\n# as a recurrence in n, with x = q^n:\n");
        for (k, c) in diagonal_recurrence(&r) {
            writeln!(text, "# f(n+{k}, n+{k}): {c}").unwrap();
        }
        self.bundle.file("diagonal.ops", text);
        self.bundle.diagonal = Some(r);
        Ok(())
    }

    fn stage_transport(&mut self, sym: &SequenceTable) -> Result<(), String> {
        let hi = self.config.transport_max;
        for c in self.config.transport.clone() {
            let scaled = SequenceTable::from_symbolic_fn(TorusKnot::trefoil(), hi + 3, |a, b| {
                sym.symbolic(a, b).unwrap().mul(&tqft_factor(a, b, c))
            });
            let mut text = String::new();
            for (i, g) in self.bundle.p.clone().iter().enumerate() {
                let t = conjugate_transport(g, c, Direction::ToTqft);
                let r = if t.extended {
                    (0..=hi as i64)
                        .flat_map(|a| (0..=hi as i64).map(move |b| (a, b)))
                        .all(|(a, b)| crate::ore::transport::apply_transported(&t, &scaled, a, b).is_ok_and(|v| v.is_zero()))
                } else {
                    // a left multiple by the common denominator annihilates the same sequence
                    let op = t.op.integral(&TermOrder::deglex()).map_err(|e| e.to_string())?;
                    writeln!(text, "{}", serialize_operator(&op)).unwrap();
                    heldout_verify(&op, &scaled, Region::new(0, hi as i64)).passed()
                };
                self.m().check(&format!("transport.c{c}.P{}", i + 1), r);
            }
            if !text.is_empty() {
                self.bundle.file(&format!("transport_c{c}.ops"), text);
            }
        }
        Ok(())
    }
}

/// ASCII picture of the staircase (rows are powers of `L2`, top down) with
/// the leading monomials marked.
pub fn staircase_picture(stair: &[LMono], leads: &[LMono]) -> String {
    let a = stair.iter().chain(leads).map(|m| m.0).max().unwrap_or(0);
    let b = stair.iter().chain(leads).map(|m| m.1).max().unwrap_or(0);
    let mut s = String::new();
    for j in (0..=b).rev() {
        write!(s, "L2^{j} ").unwrap();
        for i in 0..=a {
            let c = if stair.contains(&(i, j)) {
                'o'
            } else if leads.contains(&(i, j)) {
                '#'
            } else {
                '.'
            };
            s.push(c);
            s.push(' ');
        }
        s.truncate(s.trim_end().len());
        s.push('\n');
    }
    s
}

/// Convenience: the default pipeline.
pub fn pipeline_trefoil(config: PipelineConfig) -> Result<Bundle, String> {
    Ok(Pipeline::new(config)?.run())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text() {
        let c = PipelineConfig::from_text("seed = 3\nnegative_control = off # skip\ntransport = 0, 3, 6\n").unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.negative_control, None);
        assert_eq!(c.transport, vec![0, 3, 6]);
        assert!(PipelineConfig::from_text("nope = 1").is_err());
        assert!(PipelineConfig::from_text("seed").is_err());
    }

    #[test]
    fn reducedness_by_support() {
        let a = parse_operator("L1^2 - M1*L2").unwrap();
        let b = parse_operator("L2^2 - 1").unwrap();
        assert!(support_reduced(&[a.clone(), b.clone()], &TermOrder::deglex()));
        let c = parse_operator("L2^2 - L1^2").unwrap();
        assert!(!support_reduced(&[a, c], &TermOrder::lex()));
    }

    #[test]
    fn picture() {
        let p = staircase_picture(&STAIRCASE, &[(2, 0), (0, 3), (1, 2)]);
        assert_eq!(p, "L2^3 # . .\nL2^2 o # .\nL2^1 o o .\nL2^0 o o #\n");
    }

    #[test]
    fn diagonal_as_recurrence() {
        let r = parse_operator("M1*M2*L1*L2 - M1 - q*M2").unwrap();
        let u = diagonal_recurrence(&r);
        assert_eq!(u.len(), 2);
        assert_eq!(u[1].1.to_string(), crate::format::parse_ratfunc("M1^2").unwrap().to_string());
    }
}
