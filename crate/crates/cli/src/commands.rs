use std::path::Path;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use multipeak::continuous::{boundary_agreement_check, BoundaryReport};
use multipeak::instances::{
    build_cpp_instance, build_maxmin_instance, build_welfare_instance, cover_params, gap_ratio,
    no_bound_formula, no_value_two_players, two_player_params, two_player_validity,
    yes_value_normalized, AuctionInstance, GapReport, GapTarget, Number, Objective,
    TwoPlayerValidity,
};
use multipeak::rational::{self, format, int, ratio, to_f64, Rational};
use multipeak::set_systems::{
    collection_from_disjointness, generate_partition_family, ingest_cover_system,
    make_disjointness, validate_cover_system, verify_pairwise, verify_union_bounds,
    CollectionMode, CoverReport, DisjointnessCase, DisjointnessInstance, PairwiseReport,
    PartitionFamily, UnionReport,
};
use multipeak::solvers::{
    brute_force_cpp_with, brute_force_maxmin_with, brute_force_welfare_with, exhaustive_demand,
    greedy_cpp, greedy_welfare, lemma43_structured_opt, DemandAnswer, PriceVector, SolveResult,
};
use multipeak::verify::{
    check_monotone, check_peak_dominance, check_submodular, check_uniqueness, CheckOptions,
    CheckReport, DominanceReport, UniquenessReport,
};
use multipeak::MultiPeakValuation;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::io::{read_json, read_text, sibling_report, write_json, Envelope};
use crate::{
    BuildInstanceArgs, CaseArg, CheckArgs, DemandQueryArgs, GapObjectiveArg, GapReportArgs,
    GenDisjointnessArgs, GenSetsystemArgs, IngestCoverArgs, ModeArg, ObjectiveArg, PresetArg,
    SolveArgs, SolverArg, TargetArg,
};

fn approx(x: &Rational) -> String {
    format!("{} (≈{:.6})", format(x), to_f64(x))
}

#[derive(Serialize)]
struct SetsystemReport<'a> {
    family: String,
    pairwise: &'a PairwiseReport,
    union: &'a UnionReport,
    passes: bool,
}

pub fn gen_setsystem(args: &GenSetsystemArgs, stamp: bool) -> CliResult<()> {
    let fam = generate_partition_family(args.k, args.s, args.t, args.epsilon, args.seed)?;
    let pairwise = verify_pairwise(&fam);
    let ell = args.union_ell.unwrap_or(args.k.min(3));
    let union = verify_union_bounds(&fam, ell, args.union_samples, args.seed)?;
    let eps = to_f64(&args.epsilon);
    let passes = pairwise.within_bound && union.passes(eps);
    write_json(&args.out, &fam)?;
    let report_path = args.report.clone().unwrap_or_else(|| sibling_report(&args.out));
    let body = SetsystemReport {
        family: args.out.display().to_string(),
        pairwise: &pairwise,
        union: &union,
        passes,
    };
    write_json(&report_path, &Envelope::new("gen-setsystem", args, stamp, body))?;

    println!(
        "family: k = {}, s = {}, t = {}, m = {}, seed = {} -> {}",
        args.k,
        args.s,
        args.t,
        fam.m(),
        args.seed,
        args.out.display()
    );
    println!(
        "pairwise: max intersection {} over {} pairs (bound {}), effective ε {}",
        pairwise.max_intersection,
        pairwise.pairs_checked,
        approx(&pairwise.bound),
        approx(&pairwise.effective_epsilon)
    );
    if pairwise.cross_partition_pairs > 0 {
        println!(
            "cross-partition mean {:.3} (expected {:.3}), within 3σ: {}",
            pairwise.cross_partition_mean, pairwise.expected_mean, pairwise.mean_within_3_sigma
        );
    }
    println!(
        "unions up to ℓ = {ell}: effective ε {:.4} over distinct partitions, {:.4} overall",
        union.effective_epsilon_cross, union.effective_epsilon
    );
    println!("report -> {}", report_path.display());
    if passes {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "family exceeds its nominal ε = {}",
            format(&args.epsilon)
        )))
    }
}

pub fn gen_disjointness(args: &GenDisjointnessArgs) -> CliResult<()> {
    let case = match args.case {
        CaseArg::Yes => DisjointnessCase::Yes,
        CaseArg::No => DisjointnessCase::No,
    };
    let inst = make_disjointness(args.k, args.t, case, args.ones_per_player, args.seed)?;
    write_json(&args.out, &inst)?;
    println!(
        "disjointness: k = {}, t = {}, case {:?}, row weights {:?}, common columns {:?} -> {}",
        args.k,
        args.t,
        inst.classify(),
        inst.row_weights(),
        inst.common_columns(),
        args.out.display()
    );
    Ok(())
}

/// Direct value, else the converted normalized one, else the preset. Both given must agree.
fn reconcile(
    name: &str,
    direct: Option<Rational>,
    scaled: Option<Rational>,
    from_scaled: impl Fn(Rational) -> Rational,
    preset: Rational,
) -> CliResult<Rational> {
    match (direct, scaled.map(from_scaled)) {
        (Some(d), Some(s)) if d != s => Err(CliError::Invalid(format!(
            "--{name} = {} disagrees with its normalized form ({})",
            format(&d),
            format(&s)
        ))),
        (Some(d), _) => Ok(d),
        (None, Some(s)) => Ok(s),
        (None, None) => Ok(preset),
    }
}

pub fn build_instance(args: &BuildInstanceArgs) -> CliResult<()> {
    let (col, s, default_eps, default_preset) = match (&args.cover, &args.family) {
        (Some(path), None) => {
            if args.mode.is_some() {
                return Err(CliError::Invalid("--mode applies to family inputs only".into()));
            }
            let cs = ingest_cover_system(&read_text(path)?)?;
            let eps = args.epsilon.or(cs.epsilon().copied()).ok_or_else(|| {
                CliError::Invalid("cover system has no epsilon; pass --epsilon".into())
            })?;
            let (_, b) = cover_params(cs.s(), eps);
            (cs.to_collection(b)?, cs.s(), eps, PresetArg::Cover)
        }
        (None, Some(fam_path)) => {
            let fam: PartitionFamily = read_json(fam_path)?;
            let dis_path = args.disjointness.as_ref().expect("clap requires --disjointness");
            let dis: DisjointnessInstance = read_json(dis_path)?;
            let mode = match args.mode {
                Some(ModeArg::PerPlayer) => CollectionMode::PerPlayer,
                Some(ModeArg::SharedFirst) => CollectionMode::SharedFirst,
                None if args.objective == ObjectiveArg::Cpp => CollectionMode::SharedFirst,
                None => CollectionMode::PerPlayer,
            };
            let col = collection_from_disjointness(&fam, &dis, mode)?;
            (col, fam.s(), *fam.epsilon(), PresetArg::Communication)
        }
        _ => return Err(CliError::Invalid("pass either --family/--disjointness or --cover".into())),
    };
    let eps = args.epsilon.unwrap_or(default_eps);
    let sr = int(s as i64);
    let (preset_a, preset_b) = match args.params.unwrap_or(default_preset) {
        PresetArg::Communication => (ratio(1, 2 * s as i64), (int(1) + eps) * sr / int(col.k() as i64)),
        PresetArg::TwoPlayer => two_player_params(s, eps),
        PresetArg::Cover => cover_params(s, eps),
    };
    let a = reconcile("a", args.a, args.alpha, |alpha| alpha / sr, preset_a)?;
    let b = reconcile("b", args.b, args.beta, |beta| beta * sr, preset_b)?;

    let report = col.validate();
    let inst = match args.objective {
        ObjectiveArg::Welfare => build_welfare_instance(&col, a, b)?,
        ObjectiveArg::Maxmin => build_maxmin_instance(&col, a, b)?,
        ObjectiveArg::Cpp => build_cpp_instance(&col, a, b, args.cardinality.unwrap_or(s))?,
    };
    if let Some(path) = &args.collection_out {
        write_json(path, &col)?;
    }
    write_json(&args.out, &inst)?;

    let p = inst.provenance();
    println!(
        "instance: {:?}, k = {}, m = {}, s = {} from {}",
        inst.objective(),
        inst.k(),
        inst.m(),
        s,
        p.source
    );
    println!(
        "a = {}, b = {}, α = {}, β = {}, effective ε = {}",
        format(&p.a),
        format(&p.b),
        format(&p.alpha),
        format(&p.beta),
        p.effective_epsilon.as_ref().map_or("n/a".into(), approx)
    );
    println!(
        "collection: group sizes {:?}, max within-group intersection {}, well structured: {}",
        report.group_sizes, report.max_within_group_intersection, report.well_structured
    );
    for w in inst.valuations().iter().flat_map(|v| v.warnings()).take(3) {
        println!("warning: {w}");
    }
    println!("-> {}", args.out.display());
    Ok(())
}

#[derive(Serialize)]
struct CoverBody<'a> {
    input: String,
    report: &'a CoverReport,
}

pub fn ingest_cover(args: &IngestCoverArgs, stamp: bool) -> CliResult<()> {
    let cs = ingest_cover_system(&read_text(&args.input)?)?;
    let report = validate_cover_system(&cs);
    let body = CoverBody {
        input: args.input.display().to_string(),
        report: &report,
    };
    write_json(&args.out, &Envelope::new("ingest-cover", args, stamp, body))?;
    println!(
        "cover system: k = {}, universe {}, s = {}, sets per group {:?}, degree {:?}",
        report.k, report.universe, report.s, report.sets_per_group, report.degree
    );
    println!(
        "max intersection within groups {}, across groups {}, bound {}",
        report.max_within_group_intersection,
        report.max_cross_group_intersection,
        report.intersection_bound.as_ref().map_or("none".into(), approx)
    );
    for issue in &report.issues {
        println!("issue: {issue}");
    }
    println!("valid: {}, well structured: {} -> {}", report.valid, report.well_structured, args.out.display());
    if report.valid {
        Ok(())
    } else {
        Err(CliError::Verification(format!("{} issue(s) in {}", report.issues.len(), args.input.display())))
    }
}

/// Runs `f` on a worker thread, giving up after `limit` seconds.
fn with_time_limit<T: Send + 'static>(
    limit: Option<f64>,
    f: impl FnOnce() -> T + Send + 'static,
) -> CliResult<T> {
    let Some(secs) = limit else { return Ok(f()) };
    if !(secs > 0.0) {
        return Err(CliError::Invalid("--time-limit must be positive".into()));
    }
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let _ = tx.send(f());
    });
    rx.recv_timeout(Duration::from_secs_f64(secs))
        .map_err(|_| CliError::Guard(format!("solver exceeded the {secs} s time limit")))
}

fn run_solver(inst: AuctionInstance, solver: SolverArg, guard: u64) -> multipeak::Result<SolveResult> {
    match (inst.objective(), solver) {
        (Objective::Welfare, SolverArg::Brute) => brute_force_welfare_with(&inst, guard),
        (Objective::MaxMin, SolverArg::Brute) => brute_force_maxmin_with(&inst, guard),
        (Objective::Cpp { .. }, SolverArg::Brute) => brute_force_cpp_with(&inst, guard),
        (Objective::Welfare, SolverArg::Greedy) => greedy_welfare(&inst),
        (Objective::Cpp { .. }, SolverArg::Greedy) => greedy_cpp(&inst),
        (Objective::MaxMin, SolverArg::Greedy) => Err(multipeak::Error::InvalidParameter(
            "there is no greedy max-min solver".into(),
        )),
    }
}

#[derive(Serialize)]
struct SolveBody {
    instance: String,
    #[serde(flatten)]
    result: SolveResult,
    #[serde(with = "rational::serde_str_vec")]
    player_values: Vec<Rational>,
}

pub fn solve(args: &SolveArgs, stamp: bool) -> CliResult<()> {
    let inst: AuctionInstance = read_json(&args.instance)?;
    let (solver, guard) = (args.solver, args.guard);
    let worker = inst.clone();
    let result = with_time_limit(args.time_limit, move || run_solver(worker, solver, guard))??;
    let result = if stamp { result } else { result.without_timing() };
    let player_values = inst.player_values(&result.witness)?;
    println!(
        "{}: value {} with {} nodes on k = {}, m = {}",
        result.solver,
        approx(&result.value),
        result.nodes,
        inst.k(),
        inst.m()
    );
    println!(
        "player values: {}",
        player_values.iter().map(format).collect::<Vec<_>>().join(", ")
    );
    let body = SolveBody {
        instance: args.instance.display().to_string(),
        result,
        player_values,
    };
    write_json(&args.out, &Envelope::new("solve", args, stamp, body))?;
    println!("-> {}", args.out.display());
    Ok(())
}

#[derive(Serialize)]
struct DemandBody {
    answer: DemandAnswer,
    #[serde(skip_serializing_if = "Option::is_none")]
    exhaustive: Option<DemandAnswer>,
    #[serde(skip_serializing_if = "Option::is_none")]
    agrees: Option<bool>,
}

fn load_player(instance: &Path, player: usize) -> CliResult<MultiPeakValuation> {
    let inst: AuctionInstance = read_json(instance)?;
    inst.valuations().get(player).cloned().ok_or_else(|| {
        CliError::Invalid(format!("player {player} out of range: instance has {} players", inst.k()))
    })
}

pub fn demand_query(args: &DemandQueryArgs, stamp: bool) -> CliResult<()> {
    let v = match (&args.valuation, &args.instance) {
        (Some(path), _) => read_json(path)?,
        (None, Some(path)) => load_player(path, args.player.expect("clap requires --player"))?,
        _ => unreachable!("clap requires one source"),
    };
    let prices: PriceVector = match &args.prices {
        Some(path) => read_json(path)?,
        None => PriceVector::new(args.price.clone())?,
    };
    let answer = multipeak::solvers::demand_query(&v, &prices)?;
    let exhaustive = if args.verify { Some(exhaustive_demand(&v, &prices)?) } else { None };
    let agrees = exhaustive.as_ref().map(|e| e.utility == answer.utility);
    println!(
        "demand: bundle {:?}, value {}, price {}, utility {} ({} candidates)",
        answer.bundle.to_vec(),
        format(&answer.value),
        format(&answer.price),
        approx(&answer.utility),
        answer.candidates
    );
    if let Some(e) = &exhaustive {
        println!("exhaustive: bundle {:?}, utility {}", e.bundle.to_vec(), format(&e.utility));
    }
    let body = DemandBody {
        answer,
        exhaustive,
        agrees,
    };
    write_json(&args.out, &Envelope::new("demand-query", args, stamp, body))?;
    println!("-> {}", args.out.display());
    match agrees {
        Some(false) => Err(CliError::Verification("oracle and enumeration disagree".into())),
        _ => Ok(()),
    }
}

#[derive(Serialize, Default)]
struct BruteSection {
    #[serde(with = "rational::serde_str_opt")]
    yes: Option<Rational>,
    #[serde(with = "rational::serde_str_opt")]
    no: Option<Rational>,
    #[serde(with = "rational::serde_str_opt")]
    ratio: Option<Rational>,
    skipped: Vec<String>,
}

#[derive(Serialize)]
struct GapBody {
    #[serde(flatten)]
    report: GapReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    two_player_validity: Option<TwoPlayerValidity>,
    /// Numerical maximum over structured normalized profiles.
    #[serde(skip_serializing_if = "Option::is_none")]
    structured_no_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    brute_force: Option<BruteSection>,
}

fn target(arg: Option<TargetArg>, default: GapTarget) -> GapTarget {
    match arg {
        None => default,
        Some(TargetArg::OneMinusHalfInvE) => GapTarget::OneMinusHalfInvE,
        Some(TargetArg::SeventeenEighteenths) => GapTarget::SeventeenEighteenths,
        Some(TargetArg::ThreeQuarters) => GapTarget::ThreeQuarters,
        Some(TargetArg::SevenEighths) => GapTarget::SevenEighths,
        Some(TargetArg::OneMinusInvE) => GapTarget::OneMinusInvE,
    }
}

fn brute_value(path: &Path, guard: u64, section: &mut BruteSection) -> CliResult<Option<Rational>> {
    let inst: AuctionInstance = read_json(path)?;
    match run_solver(inst, SolverArg::Brute, guard) {
        Ok(r) => Ok(Some(r.value)),
        Err(e @ multipeak::Error::GuardExceeded { .. }) => {
            section.skipped.push(format!("{}: {e}", path.display()));
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn gap_report(args: &GapReportArgs, stamp: bool) -> CliResult<()> {
    let k = args.k;
    if k < 2 {
        return Err(CliError::Invalid("k must be at least 2".into()));
    }
    let eps = args.epsilon;
    let sr = args.s.map(|s| int(s as i64));
    let scaled = |x: Option<Rational>, f: &dyn Fn(Rational, Rational) -> Rational| x.zip(sr).map(|(x, s)| f(x, s));
    let (default_alpha, default_beta) = match (args.objective, k) {
        (GapObjectiveArg::Welfare, 2) => (ratio(2, 3), ratio(1, 2) + int(2) * eps),
        (GapObjectiveArg::Welfare, _) => (ratio(1, 2), eps),
        (GapObjectiveArg::Cpp, _) => (ratio(1, 2), (int(1) + eps) / int(k as i64)),
    };
    let alpha = reconcile("alpha", args.alpha, scaled(args.a, &|a, s| a * s), |x| x, default_alpha)?;
    let beta = reconcile("beta", args.beta, scaled(args.b, &|b, s| b / s), |x| x, default_beta)?;
    if !(alpha > int(0)) || beta < int(0) || eps < int(0) {
        return Err(CliError::Invalid("need α > 0, β >= 0 and ε >= 0".into()));
    }
    let (af, bf, ef) = (to_f64(&alpha), to_f64(&beta), to_f64(&eps));

    let mut validity = None;
    let mut structured = None;
    let report = match args.objective {
        GapObjectiveArg::Welfare => {
            let yes = Number::Exact(yes_value_normalized(k, &alpha, &beta));
            structured = (k <= 64).then(|| lemma43_structured_opt(k, af, bf, ef)).transpose()?.map(|o| o.value);
            if k == 2 {
                validity = Some(two_player_validity(&beta, &eps));
                let no = Number::Exact(no_value_two_players(&alpha, &beta)?);
                gap_ratio(yes, no, target(args.target, GapTarget::SeventeenEighteenths))?
            } else {
                let nb = no_bound_formula(k, af, ef)?;
                gap_ratio(yes, Number::Approx(nb.value), target(args.target, GapTarget::OneMinusHalfInvE))?
                    .with_parameter("k_star", nb.k_star)
            }
        }
        GapObjectiveArg::Cpp => {
            let kr = int(k as i64);
            let f = (int(1) + eps) / (int(2) * kr);
            let per_player = int(1) - f * (int(1) - f);
            let no = int(1) + (kr - int(1)) * ratio(3, 4);
            gap_ratio(
                Number::Exact(kr * per_player),
                Number::Exact(no),
                target(args.target, GapTarget::ThreeQuarters),
            )?
            .with_parameter("per_player_yes", format(&per_player))
            .with_parameter("per_player_no_close", "1/1")
            .with_parameter("per_player_no_far", "3/4")
        }
    };
    let report = report
        .with_parameter("k", k)
        .with_parameter("alpha", format(&alpha))
        .with_parameter("beta", format(&beta))
        .with_parameter("epsilon", format(&eps));

    let brute_force = if args.yes_instance.is_some() || args.no_instance.is_some() {
        let mut section = BruteSection::default();
        if let Some(p) = &args.yes_instance {
            section.yes = brute_value(p, args.guard, &mut section)?;
        }
        if let Some(p) = &args.no_instance {
            section.no = brute_value(p, args.guard, &mut section)?;
        }
        section.ratio = section.yes.zip(section.no).filter(|(y, _)| *y > int(0)).map(|(y, n)| n / y);
        Some(section)
    } else {
        None
    };

    let show = |n: &Number| match n {
        Number::Exact(r) => approx(r),
        Number::Approx(x) => format!("≈{x:.6}"),
    };
    println!("{:?}, k = {k}, α = {}, β = {}, ε = {}", args.objective, format(&alpha), format(&beta), format(&eps));
    println!("YES value {}, NO bound {}", show(&report.yes_value), show(&report.no_bound));
    println!(
        "ratio {} vs target {} (deviation {})",
        show(&report.ratio),
        show(&report.target_value),
        show(&report.deviation)
    );
    if let Some(v) = validity {
        println!("two-player bound status: {v:?}");
    }
    if let Some(x) = structured {
        println!("structured profile optimum ≈{x:.6}");
    }
    if let Some(b) = &brute_force {
        let opt = |x: &Option<Rational>| x.as_ref().map_or("skipped".into(), approx);
        println!("brute force: YES {}, NO {}, ratio {}", opt(&b.yes), opt(&b.no), opt(&b.ratio));
    }
    let body = GapBody {
        report,
        two_player_validity: validity,
        structured_no_value: structured,
        brute_force,
    };
    write_json(&args.out, &Envelope::new("gap-report", args, stamp, body))?;
    println!("-> {}", args.out.display());
    Ok(())
}

#[derive(Serialize)]
struct PlayerCheck {
    player: Option<usize>,
    m: usize,
    peaks: usize,
    /// First pair of peaks sharing more than `b` items.
    intersecting_violation: Option<(usize, usize, usize)>,
    monotone: CheckReport,
    submodular: CheckReport,
    uniqueness: UniquenessReport,
    dominance: DominanceReport,
    boundary: Vec<BoundaryReport>,
    pass: bool,
}

#[derive(Serialize)]
struct CheckBody {
    players: Vec<PlayerCheck>,
    pass: bool,
}

fn check_one(v: &MultiPeakValuation, player: Option<usize>, args: &CheckArgs) -> CliResult<PlayerCheck> {
    let opts = CheckOptions {
        exhaustive_limit: args.exhaustive_limit,
        samples: args.samples,
        seed: args.seed,
    };
    let monotone = check_monotone(v, &opts);
    let submodular = check_submodular(v, &opts);
    let uniqueness = check_uniqueness(v, &opts);
    let dominance = check_peak_dominance(v, 1_000, &opts)?;
    let boundary = v
        .peaks()
        .iter()
        .map(|peak| boundary_agreement_check(v, peak, args.boundary_trials, 1e-9, 1e-4, args.seed))
        .collect::<multipeak::Result<Vec<_>>>()?;
    let intersecting_violation = v.family().intersecting_violation();
    let pass = intersecting_violation.is_none()
        && monotone.pass()
        && submodular.pass()
        && uniqueness.pass()
        && dominance.pass
        && boundary.iter().all(|b| b.pass);
    Ok(PlayerCheck {
        player,
        m: v.m(),
        peaks: v.peaks().len(),
        intersecting_violation,
        monotone,
        submodular,
        uniqueness,
        dominance,
        boundary,
        pass,
    })
}

pub fn check(args: &CheckArgs, stamp: bool) -> CliResult<()> {
    let targets: Vec<(Option<usize>, MultiPeakValuation)> = match (&args.valuation, &args.instance) {
        (Some(path), _) => vec![(None, read_json(path)?)],
        (None, Some(path)) => {
            let inst: AuctionInstance = read_json(path)?;
            match args.player {
                Some(p) => vec![(Some(p), load_player(path, p)?)],
                None => inst.valuations().iter().cloned().enumerate().map(|(i, v)| (Some(i), v)).collect(),
            }
        }
        _ => unreachable!("clap requires one source"),
    };
    let mut players = Vec::new();
    for (player, v) in &targets {
        let r = check_one(v, *player, args)?;
        let label = player.map_or("valuation".to_string(), |p| format!("player {p}"));
        let mode = if r.submodular.exhaustive { "exhaustive" } else { "sampled" };
        println!(
            "{label}: m = {}, {} peaks, {mode}: monotone {}, submodular {}, unique closeness {}, peak dominance {}, boundary {}",
            r.m,
            r.peaks,
            r.monotone.pass(),
            r.submodular.pass(),
            r.uniqueness.pass(),
            r.dominance.pass,
            r.boundary.iter().all(|b| b.pass)
        );
        if let Some((i, j, overlap)) = r.intersecting_violation {
            println!("  peaks {i} and {j} share {overlap} items, more than b = {}", format(v.b()));
        }
        for w in [&r.monotone.violation, &r.submodular.violation].into_iter().flatten() {
            println!("  witness: set {:?}, item {}, {} > {}", w.set, w.item, format(&w.lhs), format(&w.rhs));
        }
        if let Some((set, p, q)) = &r.uniqueness.witness {
            println!("  witness: set {set:?} is close to peaks {p} and {q}");
        }
        players.push(r);
    }
    let pass = players.iter().all(|p| p.pass);
    write_json(&args.out, &Envelope::new("check", args, stamp, CheckBody { players, pass }))?;
    println!("{} -> {}", if pass { "pass" } else { "FAIL" }, args.out.display());
    if pass {
        Ok(())
    } else {
        Err(CliError::Verification("see report for witnesses".into()))
    }
}
