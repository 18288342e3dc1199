use gmbench::bench::{
    fixed_target_times, gen_caltech_style, gen_house_style, parse_generate_spec, reference_optima, run_benchmark,
    write_outputs, BenchConfig, Suite,
};
use gmbench::model::brute_force_solve;
use gmbench::solvers::{solve, SolverKind, SolverParams};

fn desk_suite() -> Suite {
    parse_generate_spec("random:12:4:4").unwrap().generate(40).unwrap()
}

fn config(solvers: &[SolverKind]) -> BenchConfig {
    BenchConfig {
        solvers: solvers.to_vec(),
        budgets: vec![0.5, 2.0],
        trials: 2,
        threads: 2,
        ..BenchConfig::default()
    }
}

#[test]
fn desk_benchmark_summary() {
    let suite = desk_suite();
    let out = run_benchmark(&suite, &config(&[SolverKind::Fm, SolverKind::FmDual, SolverKind::Sm])).unwrap();
    assert_eq!(out.records.len(), 12 * 3 * 2);
    assert!(out.records.iter().all(|r| r.solved()));

    let row = |solver: &str, budget: f64| {
        out.fixed_time
            .rows
            .iter()
            .find(|r| r.solver == solver && r.budget == budget)
            .unwrap()
    };
    for budget in [0.5, 2.0] {
        assert_eq!(row("fm", budget).opt_percent, Some(100.0));
        assert_eq!(row("fm+dual", budget).opt_percent, Some(100.0));
        assert!(row("fm+dual", budget).mean_bound.unwrap() <= row("fm+dual", budget).mean_objective.unwrap() + 1e-9);
        assert!(row("sm", budget).mean_bound.is_none());
        assert_eq!(row("sm", budget).solved, 12);
    }

    // References never exceed any run's objective and match the oracle here.
    let refs = reference_optima(&suite, &out.records);
    for (inst, &r) in suite.instances.iter().zip(&refs) {
        let opt = brute_force_solve(&inst.problem).unwrap().1;
        assert!((r - opt).abs() <= 1e-9, "{}: {r} vs {opt}", inst.name);
        for rec in out.records.iter().filter(|x| x.instance == inst.name) {
            assert!(r <= rec.objective);
        }
    }

    // fm and fm+dual reach every target; the profile ends at 1 for both.
    let table = fixed_target_times(&suite, &out.records, 1e-3);
    assert_eq!(table, out.table);
    for name in ["fm", "fm+dual"] {
        let s = out.profile.solvers.iter().position(|x| x == name).unwrap();
        assert_eq!(*out.profile.rho[s].last().unwrap(), 1.0);
        assert!(out.profile.rho[s].windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn outputs_are_written_per_cell() {
    let suite = parse_generate_spec("random:2:3:3").unwrap().generate(1).unwrap();
    let out = run_benchmark(&suite, &config(&[SolverKind::Fm, SolverKind::Ga])).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(dir.path(), &out).unwrap();
    let fixed = std::fs::read_to_string(dir.path().join("fixed_time.csv")).unwrap();
    assert_eq!(fixed.lines().count(), 1 + 2 * 2);
    let profile = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert_eq!(profile.lines().next().unwrap(), "tau,fm,ga");
    let mut runs: Vec<String> = std::fs::read_dir(dir.path().join("runs"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    runs.sort();
    assert_eq!(runs.len(), 2 * 2 * 2);
    assert_eq!(runs[0], "random_3x3_s1__fm__0.json");
    let text = std::fs::read_to_string(dir.path().join("runs").join(&runs[0])).unwrap();
    let rec: gmbench::RunRecord = serde_json::from_str(&text).unwrap();
    assert_eq!(rec.solver, "fm");
}

#[test]
fn failing_solvers_produce_unsolved_records() {
    // The linear assignment solver rejects instances with pairwise terms.
    let suite = parse_generate_spec("random:1:3:3").unwrap().generate(0).unwrap();
    let out = run_benchmark(&suite, &config(&[SolverKind::Lap, SolverKind::Fm])).unwrap();
    let lap: Vec<_> = out.records.iter().filter(|r| r.solver == "lap").collect();
    assert_eq!(lap.len(), 2);
    assert!(lap.iter().all(|r| !r.solved() && r.error.is_some() && r.objective.is_nan()));
    let json = serde_json::to_value(lap[0]).unwrap();
    assert!(json["objective"].is_null());
    let back: gmbench::RunRecord = serde_json::from_value(json).unwrap();
    assert!(back.objective.is_nan());
    assert!(out.fixed_time.to_csv().contains("lap,0.5,1,0,"));
    assert!(out.records.iter().filter(|r| r.solver == "fm").all(|r| r.solved()));
}

#[test]
fn suites_round_trip_through_a_directory() {
    let mut suite = desk_suite();
    suite.instances.push(gen_house_style(6, 2).unwrap());
    suite.instances.push(gen_caltech_style(4, 6, 1, 3).unwrap());
    let dir = tempfile::tempdir().unwrap();
    suite.save_dir(dir.path()).unwrap();
    let mut back = Suite::load_dir(dir.path()).unwrap();
    suite.instances.sort_by(|a, b| a.name.cmp(&b.name));
    back.instances.sort_by(|a, b| a.name.cmp(&b.name));
    for (a, b) in back.instances.iter().zip(&suite.instances) {
        assert_eq!(a.name, b.name);
        assert_eq!(a.problem, b.problem, "{}", a.name);
        assert_eq!(a.ground_truth, b.ground_truth, "{}", a.name);
        assert_eq!(a.optimum, b.optimum, "{}", a.name);
    }
    assert_eq!(back, suite);
}

#[test]
fn house_instances_are_solved_to_their_ground_truth() {
    let params = SolverParams::default().with_budget(5.0);
    let mut total = 0.0;
    for seed in 0..5 {
        let inst = gen_house_style(20, seed).unwrap();
        let r = solve(SolverKind::FmDual, &inst.problem, &params, &inst.name).unwrap();
        let gt = inst.ground_truth.as_ref().unwrap();
        assert!(r.objective <= inst.problem.evaluate(gt).unwrap() + 1e-9);
        total += gmbench::bench::accuracy(&r.labeling, gt).unwrap();
    }
    assert!(total / 5.0 >= 0.9, "mean accuracy {}", total / 5.0);
}

#[test]
fn caltech_ground_truth_covers_inliers_only() {
    let inst = gen_caltech_style(6, 9, 2, 11).unwrap();
    let gt = inst.ground_truth.unwrap();
    assert_eq!(gt.num_assigned(), 4);
    assert!(gt.as_slice()[4..].iter().all(Option::is_none));
    assert!(inst.problem.is_feasible(&gt));
}
