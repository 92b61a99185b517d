//! `hecke`: command-line access to the hecke-core operations.
//!
//! Exit codes: 0 on success (negative verdicts such as "not a member" or
//! "infeasible" included), 1 on a domain error, 2 on malformed input.

use std::collections::BTreeMap;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use hecke_core::algebra::{make_context, AlgInt, Ctx, GcdOutcome};
use hecke_core::builder::build_polygon_traced;
use hecke_core::builtins::{builtin, fixture, FAMILIES, FIXTURES};
use hecke_core::congruence::{is_congruence, monodromy_order};
use hecke_core::farey::FareySymbol;
use hecke_core::invariants::{
    classify_normal_with_s, kernel_from_quotient, realize, realize_kurosh, signature_of, FreeProductType, NormalWithS,
    Realization, SignatureRequest,
};
use hecke_core::maps::{aut_order, map_of};
use hecke_core::moebius::{decompose, membership_report, qgon_cusps, reduce_cusp, Cusp, Matrix2};
use hecke_core::oracle::OracleRegistry;
use hecke_core::perm::Perm;
use hecke_core::permrep::Omega;
use hecke_core::{Error, Infeasibility};

#[derive(Parser)]
#[command(name = "hecke", version, about = "Finite-index subgroups of the Hecke groups G_q")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct QArg {
    /// The Hecke group parameter q ≥ 3.
    #[arg(long)]
    q: u32,
}

#[derive(Args, Clone)]
struct SymbolInput {
    /// A bundled fixture by name (see `hecke builtin --list`).
    #[arg(long)]
    fixture: Option<String>,
    /// Symbol text, e.g. "q=3: -inf [1] 0/1 [1] inf".
    #[arg(long)]
    symbol: Option<String>,
    /// File holding symbol text or symbol JSON.
    #[arg(long)]
    file: Option<String>,
    /// A built-in family, e.g. "commutator" or "power:3"; needs --q.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    q: Option<u32>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide membership of a matrix in G_q.
    Member {
        #[command(flatten)]
        q: QArg,
        /// Matrix given row by row, e.g. "[[4L-1,L+1],[3,L]]".
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// Write a member of G_q as a word in S and T.
    Decompose {
        #[command(flatten)]
        q: QArg,
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// Reduced form of the cusp num/den.
    Reduce {
        #[command(flatten)]
        q: QArg,
        #[arg(long, allow_hyphen_values = true)]
        num: String,
        #[arg(long, allow_hyphen_values = true)]
        den: String,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
    },
    /// Cusps of the q-gon on an even line.
    Qgon {
        #[command(flatten)]
        q: QArg,
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        from: String,
        #[arg(long, allow_hyphen_values = true, default_value = "inf")]
        to: String,
    },
    /// Build a special polygon from a membership oracle.
    Polygon {
        #[command(flatten)]
        q: QArg,
        /// Oracle specification, e.g. "cong:n=2;shape=upper0", "power:r=3", "commutator".
        #[arg(long)]
        oracle: String,
        /// Upper bound on the number of special triangles.
        #[arg(long, default_value_t = 10_000)]
        max_tiles: usize,
        /// Print one line per construction step.
        #[arg(long)]
        trace: bool,
        /// Spot-check the oracle on this many random products of the generators.
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Check a symbol against the admissibility conditions.
    Validate {
        #[command(flatten)]
        input: SymbolInput,
    },
    /// Side-pairing generators of a symbol.
    Generators {
        #[command(flatten)]
        input: SymbolInput,
    },
    /// Geometric invariants (index, genus, elliptic classes, cusps).
    Invariants {
        #[command(flatten)]
        input: SymbolInput,
    },
    /// Permutation representation, group order and normality.
    Normal {
        #[command(flatten)]
        input: SymbolInput,
    },
    /// Centralizer of the permutation group of a symbol.
    Centralizer {
        #[command(flatten)]
        input: SymbolInput,
    },
    /// The map on the quotient surface.
    Map {
        #[command(flatten)]
        input: SymbolInput,
    },
    /// Level and congruence test (q = 3).
    Congruence {
        #[command(flatten)]
        input: SymbolInput,
    },
    /// Realize a signature, or name the condition that rules it out.
    Realize {
        #[command(flatten)]
        q: QArg,
        #[arg(long)]
        d: u64,
        #[arg(long, default_value_t = 0)]
        g: u64,
        #[arg(long, default_value_t = 0)]
        tau2: u64,
        /// Elliptic class counts as "r=count,...", e.g. "3=1".
        #[arg(long, default_value = "")]
        v: String,
        #[arg(long)]
        v_inf: u64,
    },
    /// Realize a free product such as "F2 * Z2 * Z5", or classify a normal subgroup containing S.
    Kurosh {
        #[command(flatten)]
        q: QArg,
        #[arg(long = "type")]
        ty: String,
        /// Classify as a normal subgroup containing S instead.
        #[arg(long)]
        normal_with_s: bool,
    },
    /// Symbol of the kernel of a regular action S ↦ s, R ↦ r.
    Kernel {
        #[command(flatten)]
        q: QArg,
        #[arg(long)]
        s: String,
        #[arg(long)]
        r: String,
        /// Degree when the cycles do not mention every point.
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Print a built-in family or fixture.
    Builtin {
        #[arg(long)]
        q: Option<u32>,
        #[arg(long)]
        family: Option<String>,
        /// List families and fixtures.
        #[arg(long)]
        list: bool,
    },
}

/// Output of one command: text lines plus the JSON form.
struct Out {
    text: Vec<String>,
    json: Value,
}

impl Out {
    fn new(text: Vec<String>, json: Value) -> Out {
        Out { text, json }
    }
}

fn ctx(q: &QArg) -> Result<Ctx, Error> {
    make_context(q.q)
}

fn load_symbol(input: &SymbolInput) -> Result<FareySymbol, Error> {
    let given = [input.fixture.is_some(), input.symbol.is_some(), input.file.is_some(), input.family.is_some()];
    if given.iter().filter(|&&b| b).count() != 1 {
        return Err(Error::InvalidInput("give exactly one of --fixture, --symbol, --file, --family".into()));
    }
    let sym = if let Some(name) = &input.fixture {
        fixture(name)?
    } else if let Some(text) = &input.symbol {
        FareySymbol::parse(text)?
    } else if let Some(path) = &input.file {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{path}: {e}")))?;
        if text.trim_start().starts_with('{') {
            let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            FareySymbol::from_json(&v)?
        } else {
            FareySymbol::parse(&text)?
        }
    } else {
        let fam = input.family.as_deref().unwrap_or_default();
        let q = input.q.ok_or_else(|| Error::InvalidInput("--family needs --q".into()))?;
        builtin(q, fam)?
    };
    if let Some(q) = input.q {
        if q != sym.q() && input.family.is_none() {
            return Err(Error::InvalidInput(format!("symbol has q={}, not {q}", sym.q())));
        }
    }
    Ok(sym)
}

/// Loads a symbol that must be valid.
fn valid_symbol(input: &SymbolInput) -> Result<FareySymbol, Error> {
    load_symbol(input)?.checked()
}

fn gcd_json(g: &GcdOutcome) -> Value {
    match g {
        GcdOutcome::Terminated(v) => json!({"outcome": "terminated", "value": v.to_string()}),
        GcdOutcome::BelowOne(v) => json!({"outcome": "below_one", "value": v.to_string()}),
    }
}

fn gcd_text(g: &GcdOutcome) -> String {
    match g {
        GcdOutcome::Terminated(v) => format!("gcd {v}"),
        GcdOutcome::BelowOne(v) => format!("remainder {v} strictly between 0 and 1"),
    }
}

fn parse_counts(text: &str) -> Result<BTreeMap<u32, u64>, Error> {
    let mut v = BTreeMap::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (r, c) = part.split_once('=').ok_or_else(|| Error::Parse(format!("expected r=count, got '{part}'")))?;
        let r: u32 = r.trim().parse().map_err(|_| Error::Parse(format!("bad order '{r}'")))?;
        let c: u64 = c.trim().parse().map_err(|_| Error::Parse(format!("bad count '{c}'")))?;
        v.insert(r, c);
    }
    Ok(v)
}

fn infeasible(reason: Infeasibility) -> Out {
    Out::new(vec![format!("infeasible: {reason}")], json!({"feasible": false, "reason": reason.to_string()}))
}

fn symbol_out(sym: &FareySymbol) -> Result<Out, Error> {
    let index = sym.index()?;
    Ok(Out::new(vec![sym.to_string(), format!("index {index}")], json!({"symbol": sym.to_json(), "text": sym.to_string(), "index": index})))
}

fn run(cli: &Cli) -> Result<Out, Error> {
    match &cli.cmd {
        Cmd::Member { q, matrix } => {
            let m = Matrix2::parse(&ctx(q)?, matrix)?;
            let (ok, cols) = membership_report(&m)?;
            let mut text = vec![if ok { "member".to_string() } else { "not a member".to_string() }];
            for (k, g) in cols.iter().enumerate() {
                text.push(format!("column {}: {}", k + 1, gcd_text(g)));
            }
            Ok(Out::new(text, json!({"member": ok, "columns": cols.iter().map(gcd_json).collect::<Vec<_>>()})))
        }
        Cmd::Decompose { q, matrix } => {
            let m = Matrix2::parse(&ctx(q)?, matrix)?;
            match decompose(&m) {
                Ok(w) => Ok(Out::new(vec![w.to_string()], json!({"member": true, "word": w.to_string()}))),
                Err(Error::NotMember) => Ok(Out::new(vec!["not a member".into()], json!({"member": false}))),
                Err(e) => Err(e),
            }
        }
        Cmd::Reduce { q, num, den, budget } => {
            let c = ctx(q)?;
            let cusp = reduce_cusp(&AlgInt::parse(&c, num)?, &AlgInt::parse(&c, den)?, *budget)?;
            Ok(Out::new(vec![cusp.to_string()], json!({"cusp": cusp.to_json(), "text": cusp.to_string()})))
        }
        Cmd::Qgon { q, from, to } => {
            let c = ctx(q)?;
            let cusps = qgon_cusps(&Cusp::parse(&c, from)?, &Cusp::parse(&c, to)?)?;
            let text: Vec<String> = cusps.iter().map(|x| x.to_string()).collect();
            Ok(Out::new(vec![text.join(" ")], json!({"cusps": text})))
        }
        Cmd::Polygon { q, oracle, max_tiles, trace, samples, seed } => {
            let c = ctx(q)?;
            let o = OracleRegistry::default().build(&c, oracle)?;
            let rep = build_polygon_traced(&o, &c, *max_tiles)?;
            let mut out = symbol_out(&rep.symbol)?;
            if *trace {
                out.text.extend(rep.log.iter().map(|l| format!("  {l}")));
            }
            out.json["log"] = json!(rep.log);
            out.json["queries"] = json!(rep.queries);
            if *samples > 0 {
                let gens = rep.symbol.generators()?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                for _ in 0..*samples {
                    let len = rng.gen_range(1..=8);
                    let mut m = Matrix2::identity(&c);
                    for _ in 0..len {
                        let g = &gens[rng.gen_range(0..gens.len())];
                        m = if rng.gen_bool(0.5) { &m * g } else { &m * &g.inverse() };
                    }
                    if !o.contains(&m) || !o.contains(&m.inverse()) {
                        return Err(Error::OracleInconsistent(format!("oracle rejects the product {m} of generators")));
                    }
                }
                out.text.push(format!("spot check: {samples} random products of generators accepted (seed {seed})"));
                out.json["spot_check"] = json!({"samples": samples, "seed": seed});
            }
            Ok(out)
        }
        Cmd::Validate { input } => {
            let sym = load_symbol(input)?;
            let v = sym.validate();
            if v.is_empty() {
                Ok(Out::new(vec!["valid".into()], json!({"valid": true, "violations": []})))
            } else {
                let msgs: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                let mut text = vec!["invalid".to_string()];
                text.extend(msgs.iter().map(|m| format!("  {m}")));
                Ok(Out::new(text, json!({"valid": false, "violations": msgs})))
            }
        }
        Cmd::Generators { input } => {
            let sym = valid_symbol(input)?;
            let mut text = Vec::new();
            let mut js = Vec::new();
            for (i, g) in sym.generators_with_intervals()? {
                let (l, r) = (&sym.cusps()[i], &sym.cusps()[i + 1]);
                let label = sym.labels()[i].to_string();
                text.push(format!("({l}, {r}) {label}  {g}"));
                js.push(json!({"interval": i, "label": label, "matrix": g.to_json(), "text": g.to_string()}));
            }
            Ok(Out::new(text, json!({"generators": js})))
        }
        Cmd::Invariants { input } => {
            let sig = signature_of(&valid_symbol(input)?)?;
            Ok(Out::new(vec![sig.to_string()], sig.to_json()))
        }
        Cmd::Normal { input } => {
            let sym = valid_symbol(input)?;
            let om = Omega::of(&sym)?;
            let order = om.group_order();
            let normal = om.is_normal();
            let perms = [("f(S)", om.f_s.clone()), ("f(R)", om.f_r.clone()), ("f(T)", om.f_t()), ("f(U)", om.f_u())];
            let mut text = vec![format!("index {}, group order {order}, {}", om.size(), if normal { "normal" } else { "not normal" })];
            let mut js = json!({"index": om.size(), "group_order": order.to_string(), "normal": normal});
            for (name, p) in &perms {
                text.push(format!("{name} = {}", om.format(p)));
                js[*name] = json!(om.format(p));
            }
            Ok(Out::new(text, js))
        }
        Cmd::Centralizer { input } => {
            let sym = valid_symbol(input)?;
            let om = Omega::of(&sym)?;
            let c = om.centralizer()?;
            let elems: Vec<String> = c.iter().map(|p| om.format(p)).collect();
            let mut text = vec![format!("centralizer order {}", c.len())];
            text.extend(elems.iter().map(|e| format!("  {e}")));
            Ok(Out::new(text, json!({"order": c.len(), "elements": elems})))
        }
        Cmd::Map { input } => {
            let sym = valid_symbol(input)?;
            let (m, om) = map_of(&sym)?;
            let aut = aut_order(&m)?;
            let mut js = m.to_json(&om);
            js["aut_order"] = json!(aut);
            let mut text = vec![
                format!("darts {}, V={} E={} F={}, genus {}, automorphisms {aut}", m.darts.len(), m.vertices, m.edges, m.faces, m.genus),
                format!("r1 = {}", om.format(&m.r1)),
                format!("r2 = {}", om.format(&m.r2)),
            ];
            text.extend(m.edge_kinds.iter().map(|(l, k)| format!("  edge {l}: {k}")));
            Ok(Out::new(text, js))
        }
        Cmd::Congruence { input } => {
            let sym = valid_symbol(input)?;
            let rep = is_congruence(&sym)?;
            let mono = monodromy_order(&sym)?;
            let mut js = rep.to_json();
            js["monodromy_order"] = json!(mono.to_string());
            let mut text = vec![format!("level {}, {}", rep.level, rep.verdict), format!("monodromy order {mono}")];
            text.extend(rep.relations.iter().map(|(n, h)| format!("  {n}: {}", if *h { "holds" } else { "fails" })));
            Ok(Out::new(text, js))
        }
        Cmd::Realize { q, d, g, tau2, v, v_inf } => {
            let req = SignatureRequest { q: q.q, d: *d, g: *g, tau2: *tau2, v: parse_counts(v)?, v_inf: *v_inf };
            match realize(&req) {
                Ok(Realization::WholeGroup) => Ok(Out::new(vec!["the whole group G_q".into()], json!({"feasible": true, "whole_group": true}))),
                Ok(Realization::Symbol(s)) => {
                    let mut out = symbol_out(&s)?;
                    out.json["feasible"] = json!(true);
                    Ok(out)
                }
                Err(Error::Infeasible(r)) => Ok(infeasible(r)),
                Err(e) => Err(e),
            }
        }
        Cmd::Kurosh { q, ty, normal_with_s } => {
            let t: FreeProductType = ty.parse()?;
            if *normal_with_s {
                return Ok(match classify_normal_with_s(q.q, &t)? {
                    NormalWithS::TypeA(s) => Out::new(vec!["type A".into(), s.to_string()], json!({"class": "A", "symbol": s.to_string()})),
                    NormalWithS::TypeB { r, symbol } => {
                        Out::new(vec![format!("type B, r = {r}"), symbol.to_string()], json!({"class": "B", "r": r, "symbol": symbol.to_string()}))
                    }
                    NormalWithS::NotRealizable => Out::new(vec!["not realizable".into()], json!({"class": null})),
                });
            }
            match realize_kurosh(q.q, &t) {
                Ok(s) => symbol_out(&s),
                Err(Error::Infeasible(r)) => Ok(infeasible(r)),
                Err(Error::ExplicitFamily(msg)) => Ok(Out::new(vec![msg.clone()], json!({"feasible": true, "explicit_family": msg}))),
                Err(e) => Err(e),
            }
        }
        Cmd::Kernel { q, s, r, degree } => {
            let s0 = Perm::parse(s, *degree)?;
            let r0 = Perm::parse(r, *degree)?;
            let n = s0.degree().max(r0.degree());
            let sym = kernel_from_quotient(q.q, &Perm::parse(s, Some(n))?, &Perm::parse(r, Some(n))?)?;
            symbol_out(&sym)
        }
        Cmd::Builtin { q, family, list } => {
            if *list {
                let fx: Vec<&str> = FIXTURES.iter().map(|(n, _)| *n).collect();
                let text = vec![format!("families: {}", FAMILIES.join(", ")), format!("fixtures: {}", fx.join(", "))];
                return Ok(Out::new(text, json!({"families": FAMILIES, "fixtures": fx})));
            }
            let fam = family.as_deref().ok_or_else(|| Error::InvalidInput("give --family or --list".into()))?;
            let q = match q {
                Some(q) => *q,
                None if fam.starts_with("fixture") => 3,
                None => return Err(Error::InvalidInput("--family needs --q".into())),
            };
            symbol_out(&builtin(q, fam)?.checked()?)
        }
    }
}

/// Writes the result, stopping quietly if stdout is closed early.
fn emit(out: &Out, as_json: bool) -> std::io::Result<()> {
    let mut w = std::io::stdout().lock();
    if as_json {
        writeln!(w, "{}", serde_json::to_string_pretty(&out.json).expect("JSON values serialize"))?;
    } else {
        for line in &out.text {
            writeln!(w, "{line}")?;
        }
    }
    w.flush()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let _ = emit(&out, cli.json);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_malformed_input() { 2 } else { 1 })
        }
    }
}
