use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;

use qholonomic::arith::modp::{PrimeField, DEFAULT_PRIME};
use qholonomic::format::{fmt_l_monomial, parse_operator, serialize_operator};
use qholonomic::golden::GoldenSet;
use qholonomic::groebner::fan::{cone_leads, groebner_fan, interior_rays, is_swap_symmetric};
use qholonomic::groebner::order::{LMono, TermOrder};
use qholonomic::groebner::{buchberger, fglm, s_pairs_reduce_to_zero, staircase, support_relation, ReducedGb};
use qholonomic::guess::{
    exact_lift, heldout_verify, heldout_verify_mod, negative_control, support_search_knot, LiftConfig, Provenance,
    Region, SearchConfig, Shape, DEFAULT_GUESS_V0, DEFAULT_OVERSAMPLING,
};
use qholonomic::jones::{jones_table, SequenceTable, TableCache, TableMode, TorusKnot, CACHE_ENV};
use qholonomic::lattice_gb::{self, images, random_lattice, ReconConfig};
use qholonomic::manifest::Manifest;
use qholonomic::ore::epsilon::epsilon_q1;
use qholonomic::ore::lattice::LatticeField;
use qholonomic::ore::transport::{conjugate_transport, tqft_factor, Direction};
use qholonomic::ore::{ore_apply, ExactField, OreOp};
use qholonomic::pipeline::{self, diagonal_recurrence, staircase_picture, table_integrity, PipelineConfig, DIAGONAL};

/// Recursions of the sl3 colored Jones polynomial of T(2,b) torus knots.
#[derive(Parser)]
#[command(name = "qholo", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Write artifacts and the manifest into this directory instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate f_{b,n1,n2} and check integrality and symmetry.
    Jones {
        #[arg(long, default_value_t = 3)]
        b: i64,
        #[arg(long, default_value_t = 10)]
        n: u32,
        /// Evaluate at q = v0^6 modulo --p instead of symbolically.
        #[arg(long)]
        v0: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_PRIME)]
        p: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Guess recurrences from the trefoil table.
    Guess {
        #[command(subcommand)]
        cmd: GuessCmd,
    },
    /// Groebner basis of a set of operators.
    Gb {
        #[command(flatten)]
        ops: OpArgs,
        /// Term order of the result: deglex, lex, lex21 or w:a,b.
        #[arg(long, default_value = "deglex")]
        order: String,
        #[command(flatten)]
        common: Common,
    },
    /// Groebner fan of the ideal generated by the operators.
    Fan {
        #[command(flatten)]
        ops: OpArgs,
        #[command(flatten)]
        common: Common,
    },
    /// The q = 1 image of an operator.
    Eps {
        #[arg(long)]
        op: PathBuf,
        /// Compare with a reference image (p1, p2, p3, q1 or q2).
        #[arg(long)]
        expect: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Conjugate an operator to the TQFT normalization d θ^c f.
    Transport {
        #[arg(long)]
        op: PathBuf,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        c: i64,
        /// Transport back from the TQFT normalization.
        #[arg(long)]
        inverse: bool,
        /// Check the result against the trefoil on [0, N]^2.
        #[arg(long)]
        verify: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// The recurrence of the diagonal f_{3,n,n}.
    Diag {
        #[command(flatten)]
        ops: OpArgs,
        /// Check the relation for n up to this bound.
        #[arg(long, default_value_t = 15)]
        max: u32,
        #[command(flatten)]
        common: Common,
    },
    /// The whole trefoil computation.
    Pipeline {
        /// Config file with `key = value` lines.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a config option, as key=value.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum GuessCmd {
    /// Search the leading monomials and minimal M-degrees.
    Search {
        #[command(flatten)]
        spec: Spec,
        #[arg(long, default_value_t = 3)]
        max_ldeg: u32,
        #[arg(long, default_value_t = 30)]
        max_mdeg: u32,
        /// Also rule out relations on the staircase up to this M-degree.
        #[arg(long)]
        negative_control: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Recover the exact operator with a given leading monomial.
    Lift {
        /// Leading L-monomial, e.g. L1^2.
        #[arg(long)]
        lead: String,
        /// M-degree of the relation.
        #[arg(long)]
        mdeg: u32,
        /// The other L-monomials, comma separated.
        #[arg(long, default_value = "1,L2,L2^2,L1,L1*L2")]
        staircase: String,
        #[command(flatten)]
        common: Common,
    },
    /// Apply an operator to the trefoil table on [0, N]^2.
    Verify {
        #[arg(long)]
        op: PathBuf,
        #[arg(long, default_value_t = 12)]
        n: u32,
        /// Check modularly at q = v0^6 modulo --p.
        #[arg(long)]
        v0: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_PRIME)]
        p: u64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone)]
struct Spec {
    #[arg(long, default_value_t = DEFAULT_GUESS_V0)]
    v0: u64,
    #[arg(long, default_value_t = DEFAULT_PRIME)]
    p: u64,
}

#[derive(Args, Clone)]
struct OpArgs {
    /// Operator files.
    #[arg(long = "op", required = true)]
    op: Vec<PathBuf>,
    /// Compute on random lattice images and reconstruct, for large inputs.
    #[arg(long)]
    lattice: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

/// Manifest plus named text artifacts.
struct Report {
    manifest: Manifest,
    files: BTreeMap<String, String>,
}

impl Report {
    fn new(cmd: &str) -> Self {
        Self { manifest: Manifest::new(cmd), files: BTreeMap::new() }
    }

    fn file(&mut self, name: &str, text: String) {
        self.manifest.output(name, &text);
        self.files.insert(name.to_string(), text);
    }

    fn emit(&self, out: Option<&Path>) -> Result<()> {
        match out {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                for (n, t) in &self.files {
                    std::fs::write(dir.join(n), t)?;
                }
                std::fs::write(dir.join("manifest.txt"), self.manifest.to_string())?;
                print!("{}", self.manifest);
            }
            None => {
                for (n, t) in &self.files {
                    println!("=== {n} ===");
                    print!("{t}");
                }
                println!("=== manifest ===");
                print!("{}", self.manifest);
            }
        }
        Ok(())
    }
}

fn read_op(path: &Path, r: &mut Report) -> Result<OreOp> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    r.manifest.input(&path.display().to_string(), &text);
    parse_operator(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn parse_lmono(s: &str) -> Result<LMono> {
    let op = parse_operator(s.trim()).map_err(|e| anyhow!("{s}: {e}"))?;
    match op.support().as_slice() {
        [m] => Ok(*m),
        _ => bail!("{s} is not an L-monomial"),
    }
}


fn table(b: TorusKnot, n: u32, mode: &TableMode) -> Result<SequenceTable> {
    let t = match TableCache::from_env() {
        Some(c) => c.table(b, n, mode),
        None => jones_table(b, n, mode),
    };
    Ok(t?)
}

fn cmd_jones(b: i64, n: u32, v0: Option<u64>, p: u64) -> Result<Report> {
    let mut r = Report::new("jones");
    let k = TorusKnot::new(b)?;
    let mode = match v0 {
        Some(v0) => TableMode::Modular { v0, p },
        None => TableMode::Symbolic,
    };
    r.manifest.param("b", b);
    r.manifest.param("n", n);
    r.manifest.param("mode", &mode);
    let t = Instant::now();
    let tab = table(k, n, &mode)?;
    r.manifest.time("table", t.elapsed());
    if mode == TableMode::Symbolic {
        let bad = table_integrity(&tab);
        for b in bad.iter().take(10) {
            eprintln!("{b}");
        }
        r.manifest.check("integrity", bad.is_empty());
    } else {
        let sym = (0..=n).all(|a| (0..=n).all(|c| tab.modular(a, c) == tab.modular(c, a)));
        r.manifest.check("symmetric", sym);
        r.manifest.check("origin", tab.modular(0, 0) == Some(1));
    }
    r.file("table.txt", tab.to_cache_text());
    Ok(r)
}

fn cmd_guess(cmd: GuessCmd) -> Result<(Report, Option<PathBuf>)> {
    let k = TorusKnot::trefoil();
    match cmd {
        GuessCmd::Search { spec, max_ldeg, max_mdeg, negative_control: neg, common } => {
            let mut r = Report::new("guess search");
            let cfg = SearchConfig { max_ldeg, max_mdeg, ..Default::default() };
            r.manifest.param("v0", spec.v0);
            r.manifest.param("p", spec.p);
            r.manifest.param("max_ldeg", max_ldeg);
            r.manifest.param("max_mdeg", max_mdeg);
            let t = Instant::now();
            let rep = support_search_knot(k, spec.v0, spec.p, &cfg)?;
            r.manifest.time("search", t.elapsed());
            for s in &rep.shapes {
                r.manifest.set(&format!("shape.{}", fmt_l_monomial(s.lead.0, s.lead.1)), s.mdeg);
            }
            r.manifest.set("staircase", qholonomic::guess::format_support(&rep.staircase));
            r.manifest.check("found", !rep.shapes.is_empty());
            if let Some(d) = neg {
                let t = Instant::now();
                let kd = negative_control(k, &rep.staircase, d, spec.v0, spec.p, DEFAULT_OVERSAMPLING)?;
                r.manifest.time("negative_control", t.elapsed());
                r.manifest.set("negative_control.kernel", kd);
                r.manifest.check("negative_control", kd == 0);
            }
            r.file("search.txt", rep.to_string());
            Ok((r, common.out))
        }
        GuessCmd::Lift { lead, mdeg, staircase, common } => {
            let mut r = Report::new("guess lift");
            let lead = parse_lmono(&lead)?;
            let mut support = staircase.split(',').map(parse_lmono).collect::<Result<Vec<_>>>()?;
            support.push(lead);
            r.manifest.param("lead", fmt_l_monomial(lead.0, lead.1));
            r.manifest.param("mdeg", mdeg);
            r.manifest.param("support", qholonomic::guess::format_support(&support));
            let prov = Provenance { v0: DEFAULT_GUESS_V0, p: DEFAULT_PRIME, grid_side: 0, equations: 0, unknowns: 0, oversampling: DEFAULT_OVERSAMPLING };
            let shape = Shape { lead, support, mdeg, provenance: prov };
            let t = Instant::now();
            let sym = table(k, 12, &TableMode::Symbolic)?;
            let res = exact_lift(k, &shape, &sym, &LiftConfig::default())?;
            r.manifest.time("lift", t.elapsed());
            r.manifest.set("unknowns", res.unknowns);
            r.manifest.set("verified_points", res.verify.checked + res.modular_check.checked);
            r.manifest.check("verified", res.verify.passed() && res.modular_check.passed());
            r.file("op.ops", serialize_operator(&res.op));
            Ok((r, common.out))
        }
        GuessCmd::Verify { op, n, v0, p, common } => {
            let mut r = Report::new("guess verify");
            let op = read_op(&op, &mut r)?;
            let s = op.support().iter().map(|m| m.0.max(m.1)).max().unwrap_or(0);
            r.manifest.param("n", n);
            let region = Region::new(0, n as i64);
            let rep = match v0 {
                Some(v0) => {
                    r.manifest.param("v0", v0);
                    r.manifest.param("p", p);
                    let fp = PrimeField::new(p)?;
                    let tab = table(k, n + s, &TableMode::Modular { v0, p })?;
                    heldout_verify_mod(&op, &tab, fp.pow(v0, 6), &fp, region)
                }
                None => heldout_verify(&op, &table(k, n + s, &TableMode::Symbolic)?, region),
            };
            r.manifest.set("points", rep.checked);
            r.manifest.set("failures", rep.failures.len());
            r.manifest.check("annihilates", rep.passed());
            Ok((r, common.out))
        }
    }
}

fn lattice_of(seed: u64) -> LatticeField {
    let fp = PrimeField::default_field();
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    random_lattice(&fp, &mut rng, 72, false)
}

fn cmd_gb(ops: OpArgs, order: &str) -> Result<Report> {
    let mut r = Report::new("gb");
    let gens = ops.op.iter().map(|p| read_op(p, &mut r)).collect::<Result<Vec<_>>>()?;
    let to = TermOrder::parse(order).ok_or_else(|| anyhow!("unknown order {order}"))?;
    let deglex = TermOrder::deglex();
    r.manifest.param("order", to);
    r.manifest.param("lattice", ops.lattice);
    let t = Instant::now();
    if ops.lattice {
        let lf = lattice_of(ops.seed);
        let gb = buchberger(&lf, &images(&lf, &gens)?, deglex)?;
        let st = staircase(&gb)?;
        r.manifest.set("leads", qholonomic::guess::format_support(&gb.leads()));
        r.manifest.set("staircase", qholonomic::guess::format_support(&st.monomials));
        r.manifest.set("rank", st.rank());
        let input_leads: Vec<LMono> = {
            let mut v: Vec<LMono> = gens.iter().map(|g| g.lead_monomial(&deglex).unwrap()).collect();
            v.sort_by(|a, b| deglex.cmp(*a, *b));
            v
        };
        r.manifest.set("input_is_basis", gb.leads() == input_leads);
        r.manifest.check("s_pairs_reduce", s_pairs_reduce_to_zero(&lf, gb.gens(), &deglex));
        if to != deglex {
            let seeds = ReconConfig { seed: ops.seed, ..Default::default() };
            let out = lattice_gb::reconstruct_ops(to, &seeds, |lf| {
                let gb = ReducedGb::from_reduced(lf, images(lf, &gens).ok()?, deglex).ok()?;
                Some(fglm(lf, &gb, to).ok()?.into_gens())
            })?;
            for (i, g) in out.iter().enumerate() {
                r.manifest.set(&format!("basis.{}.support", i + 1), qholonomic::guess::format_support(&g.support()));
                r.file(&format!("basis{}.ops", i + 1), serialize_operator(g));
            }
        }
    } else {
        let gb = buchberger(&ExactField, &gens, deglex)?;
        let gb = if to != deglex { fglm(&ExactField, &gb, to)? } else { gb };
        let st = staircase(&gb)?;
        r.manifest.set("leads", qholonomic::guess::format_support(&gb.leads()));
        r.manifest.set("staircase", qholonomic::guess::format_support(&st.monomials));
        r.manifest.set("rank", st.rank());
        r.manifest.check("s_pairs_reduce", s_pairs_reduce_to_zero(&ExactField, gb.gens(), &to));
        for (i, g) in gb.gens().iter().enumerate() {
            r.file(&format!("basis{}.ops", i + 1), serialize_operator(&g.integral(&to)?));
        }
        r.file("staircase.txt", staircase_picture(&st.monomials, &gb.leads()));
    }
    r.manifest.time("gb", t.elapsed());
    Ok(r)
}

fn cmd_fan(ops: OpArgs) -> Result<Report> {
    let mut r = Report::new("fan");
    let gens = ops.op.iter().map(|p| read_op(p, &mut r)).collect::<Result<Vec<_>>>()?;
    r.manifest.param("lattice", ops.lattice);
    let (rays, leads) = if ops.lattice {
        let lf = lattice_of(ops.seed);
        let gb = buchberger(&lf, &images(&lf, &gens)?, TermOrder::deglex())?;
        let fan = groebner_fan(&lf, &gb)?;
        (interior_rays(&fan), cone_leads(&fan))
    } else {
        let gb = buchberger(&ExactField, &gens, TermOrder::deglex())?;
        let fan = groebner_fan(&ExactField, &gb)?;
        (interior_rays(&fan), cone_leads(&fan))
    };
    let rs: Vec<String> = rays.iter().map(|(a, b)| format!("({a},{b})")).collect();
    r.manifest.set("rays", rs.join(" "));
    r.manifest.set("cones", leads.len());
    r.manifest.check("swap_symmetric", is_swap_symmetric(&rays));
    let mut text = format!("rays: {}\n", rs.join(" "));
    for (i, l) in leads.iter().enumerate() {
        text.push_str(&format!("cone {}: leads {}\n", i + 1, qholonomic::guess::format_support(l)));
    }
    r.file("fan.txt", text);
    Ok(r)
}

fn cmd_eps(op: &Path, expect: Option<String>) -> Result<Report> {
    let mut r = Report::new("eps");
    let p = read_op(op, &mut r)?;
    let e = epsilon_q1(&p)?;
    if let Some(name) = expect {
        let g = GoldenSet::load()?;
        let want = g.eps.get(&name).ok_or_else(|| anyhow!("no reference image named {name}"))?;
        r.manifest.param("expect", &name);
        r.manifest.check("matches", e.matches_up_to_m_content(want));
    }
    r.file("eps.polys", format!("eps = {}\n", e.normalized()));
    Ok(r)
}

fn cmd_transport(op: &Path, c: i64, inverse: bool, verify: Option<u32>) -> Result<Report> {
    let mut r = Report::new("transport");
    let p = read_op(op, &mut r)?;
    r.manifest.param("c", c);
    r.manifest.param("direction", if inverse { "from-tqft" } else { "to-tqft" });
    let dir = if inverse { Direction::FromTqft } else { Direction::ToTqft };
    let t = conjugate_transport(&p, c, dir);
    r.manifest.set("extended", t.extended);
    // over the base field the integral form is a left multiple and annihilates the same sequence
    let out = if t.extended { t.op.clone() } else { t.op.integral(&TermOrder::deglex())? };
    if let Some(n) = verify {
        let s = out.support().iter().map(|m| m.0.max(m.1)).max().unwrap_or(0);
        let sym = table(TorusKnot::trefoil(), n + s, &TableMode::Symbolic)?;
        let scaled = SequenceTable::from_symbolic_fn(TorusKnot::trefoil(), n + s, |a, b| {
            let h = tqft_factor(a, b, c);
            let f = sym.symbolic(a, b).unwrap();
            if inverse {
                f.clone()
            } else {
                f.mul(&h)
            }
        });
        let ok = (0..=n as i64).all(|a| {
            (0..=n as i64).all(|b| {
                if t.extended {
                    qholonomic::ore::transport::apply_transported(&t, &scaled, a, b).is_ok_and(|v| v.is_zero())
                } else {
                    ore_apply(&out, &scaled, a, b).is_ok_and(|v| v.is_zero())
                }
            })
        });
        r.manifest.param("verify", n);
        r.manifest.check("annihilates", ok);
    }
    let name = if t.extended { "transported_extended.ops" } else { "transported.ops" };
    r.file(name, serialize_operator(&out));
    Ok(r)
}

fn cmd_diag(ops: OpArgs, max: u32) -> Result<Report> {
    let mut r = Report::new("diag");
    let gens = ops.op.iter().map(|p| read_op(p, &mut r)).collect::<Result<Vec<_>>>()?;
    r.manifest.param("lattice", ops.lattice);
    r.manifest.param("max", max);
    let t = Instant::now();
    let rel = if ops.lattice {
        let cfg = ReconConfig { seed: ops.seed, ..Default::default() };
        lattice_gb::reconstruct_ops(TermOrder::deglex(), &cfg, |lf| {
            let gb = ReducedGb::from_reduced(lf, images(lf, &gens).ok()?, TermOrder::deglex()).ok()?;
            Some(vec![support_relation(lf, &gb, &DIAGONAL).ok()??])
        })?
        .remove(0)
    } else {
        let gb = buchberger(&ExactField, &gens, TermOrder::deglex())?;
        support_relation(&ExactField, &gb, &DIAGONAL)?
            .ok_or_else(|| anyhow!("no relation on the diagonal support"))?
            .integral(&TermOrder::deglex())?
    };
    r.manifest.time("relation", t.elapsed());
    let order = rel.support().iter().map(|m| m.0).max().unwrap_or(0);
    r.manifest.set("order", order);
    r.manifest.check("tau_symmetric", rel.tau(&ExactField) == rel);
    let sym = table(TorusKnot::trefoil(), max + order, &TableMode::Symbolic)?;
    let ok = (0..=max as i64).all(|n| ore_apply(&rel, &sym, n, n).is_ok_and(|v| v.is_zero()));
    r.manifest.check("annihilates_diagonal", ok);
    let mut text = String::new();
    for (k, c) in diagonal_recurrence(&rel) {
        text.push_str(&format!("f(n+{k}, n+{k}): {c}\n"));
    }
    r.file("diagonal.ops", serialize_operator(&rel));
    r.file("recurrence.txt", text);
    Ok(r)
}

fn cmd_pipeline(config: Option<PathBuf>, set: Vec<String>) -> Result<pipeline::Bundle> {
    let mut cfg = match &config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            PipelineConfig::from_text(&text).map_err(|e| anyhow!("{}: {e}", p.display()))?
        }
        None => PipelineConfig::default(),
    };
    if cfg.cache.is_none() {
        cfg.cache = std::env::var_os(CACHE_ENV).map(PathBuf::from);
    }
    for kv in &set {
        let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("--set expects key=value, got {kv}"))?;
        cfg.apply(k.trim(), v).map_err(|e| anyhow!(e))?;
    }
    pipeline::pipeline_trefoil(cfg).map_err(|e| anyhow!(e))
}

fn run(cli: Cli) -> Result<bool> {
    let (r, out) = match cli.cmd {
        Cmd::Jones { b, n, v0, p, common } => (cmd_jones(b, n, v0, p)?, common.out),
        Cmd::Guess { cmd } => cmd_guess(cmd)?,
        Cmd::Gb { ops, order, common } => (cmd_gb(ops, &order)?, common.out),
        Cmd::Fan { ops, common } => (cmd_fan(ops)?, common.out),
        Cmd::Eps { op, expect, common } => (cmd_eps(&op, expect)?, common.out),
        Cmd::Transport { op, c, inverse, verify, common } => (cmd_transport(&op, c, inverse, verify)?, common.out),
        Cmd::Diag { ops, max, common } => (cmd_diag(ops, max)?, common.out),
        Cmd::Pipeline { config, set, common } => {
            let b = cmd_pipeline(config, set)?;
            match &common.out {
                Some(dir) => {
                    b.write_to(dir)?;
                    print!("{}", b.manifest);
                }
                None => print!("{}", b.manifest),
            }
            if let Some(a) = &b.aborted {
                eprintln!("aborted: {a}");
            }
            return Ok(b.ok());
        }
    };
    r.emit(out.as_deref())?;
    Ok(r.manifest.ok())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
