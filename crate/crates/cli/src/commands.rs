//! Implementations of the CLI subcommands. Every command validates its
//! parameters, writes a `RunManifest` next to its outputs, and keeps
//! machine-readable reports exact (rationals as `num/den`, big counts
//! as decimal strings).

use crate::caps::Caps;
use crate::formats;
use crate::instance_io::{self, parse_rat, rat_to_string};
use crate::manifest::{
    RunManifest, REGIME_COMPLETENESS, REGIME_ESTIMATE, REGIME_SOUNDNESS_OUT,
};
use crate::{CliError, Outcome};
use num_bigint::BigInt;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde_json::json;
use std::path::{Path, PathBuf};
use svpforge_core::cr::{CrParams, CrReduction, CrWitness, ProblemKind};
use svpforge_core::ff::Tower;
use svpforge_core::geometry::{
    edge_expansion, enumerate_planes, pvp_edges, CayleyGraph, PlaneSpace,
};
use svpforge_core::lattice::{gap_decide, lambda2_oracle, svp_oracle, GapAnswer, SvpOutcome};
use svpforge_core::poly::DegreeKind;
use svpforge_core::subexp::{SubexpParams, SubexpReduction};
use svpforge_core::superassign::{
    check_simple, check_weak_pvp, decompose, ConsistencyOutcome, DecomposeIndex,
    DecomposeOutcome, PlaneSet, SimpleOutcome, SuperAssignment,
};
use svpforge_core::{rat_string, Rat};

fn write_out(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), content)?;
    Ok(())
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

pub struct GenSubexpArgs {
    pub cnf: PathBuf,
    pub q: u64,
    pub h: Option<u64>,
    pub p: u32,
    pub usvp: bool,
    pub materialize: bool,
    pub out: PathBuf,
}

pub fn gen_subexp(args: &GenSubexpArgs, caps: &Caps) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(&args.cnf)?;
    let formula = formats::parse_cnf(&text, true)?;
    let params = match args.h {
        Some(h) => SubexpParams {
            q: args.q,
            h_size: h,
            p: args.p,
            usvp: args.usvp,
        },
        None => SubexpParams::for_formula(formula.num_vars, args.q, args.p, args.usvp),
    };
    let red = SubexpReduction::new(formula, params.clone())?;
    let counts = red.constraint_counts()?;
    let mut manifest = RunManifest::new("gen-subexp");
    manifest
        .param("q", params.q)
        .param("h", params.h_size)
        .param("d", params.degree())
        .param("p", params.p)
        .param("usvp", params.usvp)
        .param("mode", if args.materialize { "materialize" } else { "implicit" })
        .input("cnf", text.as_bytes())
        .regime(REGIME_SOUNDNESS_OUT);
    let descriptor = json!({
        "mode": if args.materialize { "materialize" } else { "implicit" },
        "planes": red.planes().len(),
        "variable_count": red.variable_count().to_string(),
        "variable_count_formula": red.variable_count_formula().to_string(),
        "constraints": {
            "simple": counts.simple,
            "consistency": counts.consistency,
            "sat3": counts.sat3.to_string(),
            "usvp_degree": counts.usvp_degree.to_string(),
            "usvp_dummy": counts.usvp_dummy.to_string(),
        },
    });
    write_out(&args.out, "manifest.json", &manifest.to_json())?;
    write_out(&args.out, "descriptor.json", &pretty(&descriptor))?;
    if args.materialize {
        let inst = red.build_instance(caps.materialize)?;
        instance_io::write_instance(&args.out.join("instance"), &inst)?;
    }
    Ok(Outcome::Success)
}

pub struct GenCrArgs {
    pub graph: Option<PathBuf>,
    pub cnf: Option<PathBuf>,
    pub q: u64,
    pub t: usize,
    pub h: Option<u64>,
    pub p: u32,
    pub c: u64,
    pub depth_cap: usize,
    pub stop_threshold: Option<u64>,
    pub out: PathBuf,
}

fn cr_problem(
    graph: &Option<PathBuf>,
    cnf: &Option<PathBuf>,
) -> Result<(ProblemKind, String, Vec<u8>, usize), CliError> {
    match (graph, cnf) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)?;
            let (g, _) = formats::parse_graph(&text)?;
            let n = g.num_vertices;
            Ok((ProblemKind::ThreeCol(g), "graph".into(), text.into_bytes(), n))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            let f = formats::parse_cnf(&text, true)?;
            let n = f.num_vars + f.clauses.len();
            Ok((
                ProblemKind::UnambiguousSat(f),
                "cnf".into(),
                text.into_bytes(),
                n,
            ))
        }
        _ => Err(CliError::Other(
            "exactly one of --graph (3COL) or --cnf (Unambiguous-3SAT) is required".into(),
        )),
    }
}

fn cr_params(args: &GenCrArgs, points_needed: usize, caps: &Caps) -> CrParams {
    let h = args.h.unwrap_or_else(|| {
        let mut h = 1u64;
        while (h as u128).pow(args.t as u32) < points_needed as u128 {
            h += 1;
        }
        h
    });
    let mut p = CrParams::new(args.q, args.t, h, args.p);
    p.c = args.c;
    p.depth_cap = args.depth_cap;
    p.plane_cap = caps.planes;
    if let Some(thr) = args.stop_threshold {
        p.stop_threshold = thr;
    }
    p
}

pub fn gen_cr(args: &GenCrArgs, caps: &Caps) -> Result<Outcome, CliError> {
    let (problem, input_name, input_bytes, needed) = cr_problem(&args.graph, &args.cnf)?;
    let params = cr_params(args, needed, caps);
    let red = CrReduction::new(problem, params.clone())?;
    let report = red.size_report()?;
    let mut manifest = RunManifest::new("gen-cr");
    manifest
        .param("q", params.q)
        .param("t", params.t)
        .param("h", params.h_size)
        .param("d0", params.d0())
        .param("p", params.p)
        .param("c", params.c)
        .param("depth_cap", params.depth_cap)
        .param("stop_threshold", params.stop_threshold)
        .input(&input_name, &input_bytes)
        .regime(REGIME_SOUNDNESS_OUT);
    let descriptor = json!({
        "mode": "implicit",
        "schedule": report.schedule,
        "schedule_depth": report.schedule_depth,
        "max_depth": report.max_depth,
        "nodes_per_depth": report.nodes_per_depth.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "leaf_count": report.leaf_count.to_string(),
        "leaf_printed_bound": report.leaf_printed_bound.to_string(),
        "leaf_within_bound": report.leaf_within_bound,
        "per_leaf_entries_max": report.per_leaf_entries_max.to_string(),
        "per_leaf_printed_bound": report.per_leaf_printed_bound.to_string(),
        "per_leaf_within_bound": report.per_leaf_within_bound,
        "variable_count": report.variable_count.to_string(),
        "asymptotic_note": report.asymptotic_note,
    });
    write_out(&args.out, "manifest.json", &manifest.to_json())?;
    write_out(&args.out, "descriptor.json", &pretty(&descriptor))?;
    Ok(Outcome::Success)
}

pub enum VerifyArgs {
    Subexp {
        cnf: PathBuf,
        witness: PathBuf,
        q: u64,
        h: Option<u64>,
        p: u32,
        usvp: bool,
    },
    Cr {
        graph: Option<PathBuf>,
        cnf: Option<PathBuf>,
        witness: PathBuf,
        q: u64,
        t: usize,
        h: Option<u64>,
        p: u32,
        c: u64,
    },
}

pub fn verify_complete(
    args: &VerifyArgs,
    caps: &Caps,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    match args {
        VerifyArgs::Subexp {
            cnf,
            witness,
            q,
            h,
            p,
            usvp,
        } => {
            let text = std::fs::read_to_string(cnf)?;
            let formula = formats::parse_cnf(&text, true)?;
            let wtext = std::fs::read_to_string(witness)?;
            let sigma = formats::parse_bool_witness(&wtext, formula.num_vars)?;
            let params = match h {
                Some(h) => SubexpParams {
                    q: *q,
                    h_size: *h,
                    p: *p,
                    usvp: *usvp,
                },
                None => SubexpParams::for_formula(formula.num_vars, *q, *p, *usvp),
            };
            let red = SubexpReduction::new(formula, params.clone())?;
            let report = red.verify_natural(&sigma)?;
            let mut manifest = RunManifest::new("verify-complete");
            manifest
                .param("mode", "subexp")
                .param("q", params.q)
                .param("h", params.h_size)
                .param("p", params.p)
                .param("usvp", params.usvp)
                .input("cnf", text.as_bytes())
                .input("witness", wtext.as_bytes())
                .regime(REGIME_SOUNDNESS_OUT);
            if report.all_passed {
                manifest.regime(REGIME_COMPLETENESS);
            }
            let rep = json!({
                "mode": "subexp",
                "all_passed": report.all_passed,
                "kappa": report.kappa.as_ref().map(|k| k.to_string()),
                "norm_pow": report.norm_string(),
                "max_support": report.max_support,
                "violations": report.violations,
                "constraints": {
                    "simple": report.counts.simple,
                    "consistency": report.counts.consistency,
                    "sat3": report.counts.sat3.to_string(),
                    "usvp_degree": report.counts.usvp_degree.to_string(),
                    "usvp_dummy": report.counts.usvp_dummy.to_string(),
                },
            });
            emit_report(out, &manifest, &rep)?;
            Ok(if report.all_passed {
                Outcome::Success
            } else {
                Outcome::MathNo
            })
        }
        VerifyArgs::Cr {
            graph,
            cnf,
            witness,
            q,
            t,
            h,
            p,
            c,
        } => {
            let gen_args = GenCrArgs {
                graph: graph.clone(),
                cnf: cnf.clone(),
                q: *q,
                t: *t,
                h: *h,
                p: *p,
                c: *c,
                depth_cap: 1,
                stop_threshold: None,
                out: PathBuf::new(),
            };
            let (problem, input_name, input_bytes, needed) = cr_problem(graph, cnf)?;
            let params = cr_params(&gen_args, needed, caps);
            let wtext = std::fs::read_to_string(witness)?;
            let cr_witness = match &problem {
                ProblemKind::ThreeCol(g) => {
                    CrWitness::Coloring(formats::parse_coloring(&wtext, g.num_vertices)?)
                }
                ProblemKind::UnambiguousSat(f) => {
                    CrWitness::Assignment(formats::parse_bool_witness(&wtext, f.num_vars)?)
                }
            };
            let red = CrReduction::new(problem, params.clone())?;
            let report = red.verify_natural(&cr_witness)?;
            let mut manifest = RunManifest::new("verify-complete");
            manifest
                .param("mode", "cr")
                .param("q", params.q)
                .param("t", params.t)
                .param("h", params.h_size)
                .param("p", params.p)
                .param("c", params.c)
                .param("depth_cap", params.depth_cap)
                .input(&input_name, &input_bytes)
                .input("witness", wtext.as_bytes())
                .regime(REGIME_SOUNDNESS_OUT);
            if report.all_passed {
                manifest.regime(REGIME_COMPLETENESS);
            }
            let rep = json!({
                "mode": "cr",
                "all_passed": report.all_passed,
                "norm_pow": report.norm_string(),
                "telescope_pow": rat_string(&report.telescope_pow),
                "leaf_count": report.leaf_count,
                "l2g_rows": report.l2g_rows,
                "problem_rows": report.problem_rows,
                "violation_count": report.violation_count,
                "first_violation": report.first_violation,
            });
            emit_report(out, &manifest, &rep)?;
            Ok(if report.all_passed {
                Outcome::Success
            } else {
                Outcome::MathNo
            })
        }
    }
}

fn emit_report(
    out: Option<&Path>,
    manifest: &RunManifest,
    report: &serde_json::Value,
) -> Result<(), CliError> {
    let text = pretty(report);
    match out {
        Some(dir) => {
            write_out(dir, "manifest.json", &manifest.to_json())?;
            write_out(dir, "report.json", &text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

pub fn svp_solve(instance: &Path, caps: &Caps, out: Option<&Path>) -> Result<Outcome, CliError> {
    let inst = instance_io::read_instance(instance)?;
    let mut manifest = RunManifest::new("svp-solve");
    manifest
        .param("instance", instance.display())
        .param("enum_rank_cap", caps.enum_rank)
        .param("node_budget", caps.nodes);
    match svp_oracle(&inst, caps.enum_rank, caps.nodes)? {
        SvpOutcome::Found {
            coeffs,
            vector,
            norm_pow,
        } => {
            let answer = gap_decide(&norm_pow, inst.threshold_pow(), &Rat::one());
            let rep = json!({
                "lambda1_pow": rat_string(&norm_pow),
                "threshold_pow": rat_string(inst.threshold_pow()),
                "at_most_threshold": matches!(answer, GapAnswer::Yes),
                "coeffs": coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "vector": vector.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            });
            emit_report(out, &manifest, &rep)?;
            Ok(Outcome::Success)
        }
        SvpOutcome::BoundExceeded { visited } => {
            let rep = json!({
                "bound_exceeded": true,
                "visited": visited,
            });
            emit_report(out, &manifest, &rep)?;
            Ok(Outcome::MathNo)
        }
    }
}

pub fn usvp_check(
    instance: &Path,
    gamma_pow: Option<&str>,
    caps: &Caps,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let inst = instance_io::read_instance(instance)?;
    let gamma_pow = match gamma_pow {
        Some(s) => parse_rat(s)?,
        None => Rat::one(),
    };
    let mut manifest = RunManifest::new("usvp-check");
    manifest
        .param("instance", instance.display())
        .param("gamma_pow", rat_to_string(&gamma_pow));
    let (v1, l1) = match svp_oracle(&inst, caps.enum_rank, caps.nodes)? {
        SvpOutcome::Found {
            vector, norm_pow, ..
        } => (vector, norm_pow),
        SvpOutcome::BoundExceeded { visited } => {
            let rep = json!({ "bound_exceeded": true, "visited": visited });
            emit_report(out, &manifest, &rep)?;
            return Ok(Outcome::MathNo);
        }
    };
    let l2 = match lambda2_oracle(&inst, &v1, caps.enum_rank, caps.nodes)? {
        SvpOutcome::Found { norm_pow, .. } => norm_pow,
        SvpOutcome::BoundExceeded { visited } => {
            let rep = json!({ "bound_exceeded": true, "visited": visited });
            emit_report(out, &manifest, &rep)?;
            return Ok(Outcome::MathNo);
        }
    };
    // YES promise: λ1 <= C and λ2 >= γ·C (both on exact p-th powers)
    let yes_lambda1 = &l1 <= inst.threshold_pow();
    let yes_lambda2 = l2 >= &gamma_pow * inst.threshold_pow();
    let rep = json!({
        "lambda1_pow": rat_string(&l1),
        "lambda2_pow": rat_string(&l2),
        "threshold_pow": rat_string(inst.threshold_pow()),
        "gamma_pow": rat_to_string(&gamma_pow),
        "lambda1_at_most_threshold": yes_lambda1,
        "lambda2_at_least_gamma_threshold": yes_lambda2,
        "unique_promise_holds": yes_lambda1 && yes_lambda2,
    });
    emit_report(out, &manifest, &rep)?;
    Ok(if yes_lambda1 && yes_lambda2 {
        Outcome::Success
    } else {
        Outcome::MathNo
    })
}

pub struct PvpAnalyzeArgs {
    pub q: u64,
    pub t: usize,
    pub subsets: usize,
    pub seed: u64,
    pub cayley_characters: usize,
    pub mixing_subsets: usize,
    pub star_subsets: usize,
    pub out: Option<PathBuf>,
}

pub fn pvp_analyze(args: &PvpAnalyzeArgs, caps: &Caps) -> Result<Outcome, CliError> {
    let tower = Tower::new(args.q, 0)?;
    let planes = enumerate_planes(&tower, 0, args.t, caps.planes)?;
    let edges = pvp_edges(&tower, &planes)?;
    let n = planes.len();
    let mut rng = ChaCha12Rng::seed_from_u64(args.seed);
    let bound_const = Rat::one()
        - Rat::new(BigInt::from(3), BigInt::from(args.q));
    let mut rows = Vec::new();
    let mut all_ok = true;
    for _ in 0..args.subsets {
        let mut in_s = vec![false; n];
        while !in_s.iter().any(|&b| b) {
            for b in in_s.iter_mut() {
                *b = rng.gen_bool(0.5);
            }
        }
        let size = in_s.iter().filter(|&&b| b).count();
        let phi = edge_expansion(n, &edges, &in_s)?;
        let bound = &bound_const - Rat::new(BigInt::from(size as u64), BigInt::from(n as u64));
        let ok = phi >= bound;
        all_ok &= ok;
        rows.push(json!({
            "size": size,
            "phi": rat_string(&phi),
            "bound": rat_string(&bound),
            "satisfied": ok,
        }));
    }
    // Cayley toolbox checks (prime field)
    let mut cayley = serde_json::Map::new();
    if args.cayley_characters > 0 || args.mixing_subsets > 0 || args.star_subsets > 0 {
        let graph = CayleyGraph::new(&tower, args.t)?;
        if args.cayley_characters > 0 {
            let mut checked = 0u64;
            let mut ok = true;
            for _ in 0..args.cayley_characters {
                let x = rng.gen_range(0..graph.vertex_count());
                let u = rng.gen_range(0..graph.vertex_count());
                ok &= graph.character_eigen_check(x, 0);
                ok &= graph.character_eigen_check(x, u);
                checked += 1;
            }
            all_ok &= ok;
            cayley.insert("characters_checked".into(), json!(checked));
            cayley.insert("eigenvalues_match".into(), json!(ok));
            cayley.insert("lambda".into(), json!(rat_string(&graph.lambda())));
        }
        if args.mixing_subsets > 0 {
            let mut ok = true;
            for _ in 0..args.mixing_subsets {
                let mut in_s = vec![false; graph.vertex_count() as usize];
                while !in_s.iter().any(|&b| b) {
                    for b in in_s.iter_mut() {
                        *b = rng.gen_bool(0.5);
                    }
                }
                ok &= graph.mixing_witness(&in_s)?.holds;
            }
            all_ok &= ok;
            cayley.insert("mixing_subsets".into(), json!(args.mixing_subsets));
            cayley.insert("mixing_holds".into(), json!(ok));
        }
        if args.star_subsets > 0 {
            let space = PlaneSpace::new(&tower, 0, args.t)?;
            let correction = Rat::new(BigInt::from(1), BigInt::from(args.q))
                + Rat::new(BigInt::from(1), BigInt::from(args.q * args.q));
            let mut ok = true;
            for _ in 0..args.star_subsets {
                let mut in_s = vec![false; n];
                while !in_s.iter().any(|&b| b) {
                    for b in in_s.iter_mut() {
                        *b = rng.gen_bool(0.5);
                    }
                }
                let phi = edge_expansion(n, &edges, &in_s)?;
                let star = graph.star_lift(&space, &in_s);
                let phi_star = graph.expansion(&star)?;
                ok &= phi >= phi_star - correction.clone();
            }
            all_ok &= ok;
            cayley.insert("star_subsets".into(), json!(args.star_subsets));
            cayley.insert("star_transfer_holds".into(), json!(ok));
        }
    }
    let mut manifest = RunManifest::new("pvp-analyze");
    manifest
        .param("q", args.q)
        .param("t", args.t)
        .param("subsets", args.subsets)
        .param("seed", args.seed);
    let rep = json!({
        "planes": n,
        "edges": edges.len(),
        "expansion_rows": rows,
        "all_satisfied": all_ok,
        "cayley": cayley,
    });
    emit_report(args.out.as_deref(), &manifest, &rep)?;
    Ok(if all_ok { Outcome::Success } else { Outcome::MathNo })
}

pub struct DecomposeArgs {
    pub input: PathBuf,
    pub q: u64,
    pub t: usize,
    pub d: u32,
    pub family_bound: Option<u32>,
    pub k_max: usize,
    pub out: Option<PathBuf>,
}

pub fn decompose_cmd(args: &DecomposeArgs, caps: &Caps) -> Result<Outcome, CliError> {
    let tower = Tower::new(args.q, 0)?;
    let bound = args.family_bound.unwrap_or(args.t as u32 * args.d);
    let set = PlaneSet::full(&tower, 0, args.t, DegreeKind::Total, bound)?;
    let text = std::fs::read_to_string(&args.input)?;
    let assignment = parse_assignment(&set, &text)?;
    let mut manifest = RunManifest::new("decompose");
    manifest
        .param("q", args.q)
        .param("t", args.t)
        .param("d", args.d)
        .param("family_bound", bound)
        .param("k_max", args.k_max)
        .input("assignment", text.as_bytes());
    let kappa = match check_simple(&set, &assignment) {
        SimpleOutcome::Kappa(k) => Some(k.to_string()),
        SimpleOutcome::Violation { .. } => None,
    };
    if let ConsistencyOutcome::Violation {
        p1,
        p2,
        point,
        value,
    } = check_weak_pvp(&set, &assignment)?
    {
        let rep = json!({
            "outcome": "fail",
            "reason": format!(
                "weak Plane-vs-Plane violation between planes {p1} and {p2} at {point:?} value {value:?}"
            ),
            "kappa": kappa,
        });
        emit_report(args.out.as_deref(), &manifest, &rep)?;
        return Ok(Outcome::MathNo);
    }
    let index = DecomposeIndex::build(&set, args.d, caps.candidates)?;
    match decompose(&set, &index, &assignment, args.k_max)? {
        DecomposeOutcome::Components(comps) => {
            let rep = json!({
                "outcome": "components",
                "kappa": kappa,
                "components": comps.iter().map(|(a, g)| json!({
                    "coeff": a.to_string(),
                    "terms": g.terms_graded_lex().iter().map(|(e, c)| json!({
                        "exps": e,
                        "coeff": tower.elem_index(c).unwrap_or_default().to_string(),
                    })).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            });
            emit_report(args.out.as_deref(), &manifest, &rep)?;
            Ok(Outcome::Success)
        }
        DecomposeOutcome::Fail(reason) => {
            let rep = json!({
                "outcome": "fail",
                "reason": reason,
                "kappa": kappa,
            });
            emit_report(args.out.as_deref(), &manifest, &rep)?;
            Ok(Outcome::MathNo)
        }
    }
}

/// Parses the serialized super-assignment: a JSON list of entries with
/// the plane's canonical `(base, dir1, dir2)` integer coordinates, the
/// decimal function index, and the integer value.
fn parse_assignment(set: &PlaneSet, text: &str) -> Result<SuperAssignment, CliError> {
    #[derive(serde::Deserialize)]
    struct EntryFile {
        plane: PlaneFile,
        fn_index: String,
        value: String,
    }
    #[derive(serde::Deserialize)]
    struct PlaneFile {
        base: Vec<u64>,
        dir1: Vec<u64>,
        dir2: Vec<u64>,
    }
    #[derive(serde::Deserialize)]
    struct AssignmentFile {
        entries: Vec<EntryFile>,
    }
    let file: AssignmentFile = serde_json::from_str(text)
        .map_err(|e| CliError::Other(format!("bad assignment file: {e}")))?;
    let tower = set.tower().clone();
    let mut a = SuperAssignment::zero();
    for entry in file.entries {
        let to_pt = |v: &[u64]| -> Vec<svpforge_core::ff::FieldElem> {
            v.iter().map(|&c| tower.from_base(0, c)).collect()
        };
        let plane = svpforge_core::geometry::canonicalize(
            &tower,
            &to_pt(&entry.plane.base),
            &to_pt(&entry.plane.dir1),
            &to_pt(&entry.plane.dir2),
        )?;
        let pi = set
            .plane_index(&plane)
            .ok_or_else(|| CliError::Other("entry plane is not in the family".into()))?;
        let idx = num_bigint::BigUint::parse_bytes(entry.fn_index.as_bytes(), 10)
            .ok_or_else(|| CliError::Other(format!("bad function index {}", entry.fn_index)))?;
        if idx >= set.family().count() {
            return Err(CliError::Other(format!(
                "function index {} outside the family",
                entry.fn_index
            )));
        }
        let val: BigInt = entry
            .value
            .parse()
            .map_err(|_| CliError::Other(format!("bad value {}", entry.value)))?;
        let cur = a.get(pi, &idx) + val;
        a.set(pi, idx, cur);
    }
    Ok(a)
}

/// Serializes a super-assignment in the format `parse_assignment` reads.
pub fn assignment_to_json(set: &PlaneSet, a: &SuperAssignment) -> String {
    let entries: Vec<serde_json::Value> = a
        .entries()
        .iter()
        .map(|((p, f), v)| {
            let plane = &set.planes()[*p];
            let coords = |pt: &[svpforge_core::ff::FieldElem]| -> Vec<u64> {
                pt.iter().map(|e| e.prime_value().unwrap_or(0)).collect()
            };
            json!({
                "plane": {
                    "base": coords(plane.base()),
                    "dir1": coords(plane.dir1()),
                    "dir2": coords(plane.dir2()),
                },
                "fn_index": f.to_string(),
                "value": v.to_string(),
            })
        })
        .collect();
    pretty(&json!({ "entries": entries }))
}

pub enum SizeReportArgs {
    Subexp {
        cnf: PathBuf,
        q: u64,
        h: Option<u64>,
        p: u32,
        usvp: bool,
        stream_cap: u64,
    },
    Cr(GenCrArgs),
}

pub fn size_report(args: &SizeReportArgs, caps: &Caps) -> Result<Outcome, CliError> {
    match args {
        SizeReportArgs::Subexp {
            cnf,
            q,
            h,
            p,
            usvp,
            stream_cap,
        } => {
            let text = std::fs::read_to_string(cnf)?;
            let formula = formats::parse_cnf(&text, true)?;
            let params = match h {
                Some(h) => SubexpParams {
                    q: *q,
                    h_size: *h,
                    p: *p,
                    usvp: *usvp,
                },
                None => SubexpParams::for_formula(formula.num_vars, *q, *p, *usvp),
            };
            let red = SubexpReduction::new(formula, params)?;
            let counts = red.constraint_counts()?;
            let streamed = red
                .variable_count_streamed(*stream_cap)
                .map(|c| c.to_string())
                .ok();
            let mut manifest = RunManifest::new("size-report");
            manifest
                .param("mode", "subexp")
                .input("cnf", text.as_bytes())
                .regime(REGIME_ESTIMATE);
            let rep = json!({
                "mode": "subexp",
                "planes": red.planes().len(),
                "variable_count": red.variable_count().to_string(),
                "variable_count_formula": red.variable_count_formula().to_string(),
                "variable_count_streamed": streamed,
                "constraints": {
                    "simple": counts.simple,
                    "consistency": counts.consistency,
                    "sat3": counts.sat3.to_string(),
                    "usvp_degree": counts.usvp_degree.to_string(),
                    "usvp_dummy": counts.usvp_dummy.to_string(),
                },
            });
            emit_report(None, &manifest, &rep)?;
            Ok(Outcome::Success)
        }
        SizeReportArgs::Cr(gen) => {
            let (problem, _, _, needed) = cr_problem(&gen.graph, &gen.cnf)?;
            let params = cr_params(gen, needed, caps);
            let red = CrReduction::new(problem, params)?;
            let report = red.size_report()?;
            let enumerated = red.counts_by_enumeration().ok();
            let mut manifest = RunManifest::new("size-report");
            manifest.param("mode", "cr").regime(REGIME_ESTIMATE);
            let rep = json!({
                "mode": "cr",
                "schedule": report.schedule,
                "schedule_depth": report.schedule_depth,
                "max_depth": report.max_depth,
                "nodes_per_depth": report.nodes_per_depth.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "leaf_count": report.leaf_count.to_string(),
                "leaf_printed_bound": report.leaf_printed_bound.to_string(),
                "leaf_within_bound": report.leaf_within_bound,
                "per_leaf_entries_max": report.per_leaf_entries_max.to_string(),
                "per_leaf_printed_bound": report.per_leaf_printed_bound.to_string(),
                "per_leaf_within_bound": report.per_leaf_within_bound,
                "variable_count": report.variable_count.to_string(),
                "counts_by_enumeration": enumerated.map(|(n, l)| json!({
                    "nodes": n.to_string(),
                    "leaves": l.to_string(),
                })),
                "asymptotic_note": report.asymptotic_note,
            });
            emit_report(None, &manifest, &rep)?;
            Ok(if report.leaf_within_bound && report.per_leaf_within_bound {
                Outcome::Success
            } else {
                Outcome::MathNo
            })
        }
    }
}

/// The natural-assignment diagnostic of the subexp soundness argument:
/// zero / unit / other plane counts (asserted nowhere, reported only).
pub fn plane_profile_json(red: &SubexpReduction, a: &SuperAssignment) -> serde_json::Value {
    let (zeros, units, bad) = red.plane_unit_profile(a);
    json!({ "zero_planes": zeros, "unit_planes": units, "other_planes": bad })
}
