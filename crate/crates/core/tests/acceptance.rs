//! Acceptance gate: one test per shipping criterion, each printing a
//! `[PASS]`/`[FAIL]` line (visible with `--nocapture`, always on failure).

use std::collections::{BTreeMap, HashMap};
use std::panic;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use aigsynth::aiger::{parse_ascii, partition_inputs, serialize_ascii, AigCircuit};
use aigsynth::bdd::{BddManager, BddVar, NodeRef, Quant};
use aigsynth::game::{build_game, solve, SafetyGame, SolverOptions};
use aigsynth::gen::{
    assignment_bits, counter_spec, random_circuit, random_formula, truth_table, Formula,
    RandomCircuitParams,
};
use aigsynth::harness::{
    judge, score, select_benchmarks, BenchmarkRecord, ExecutionMode, JudgedRecord, Judgment,
    KnownStatus, RunOutcome, RunRecord, SolutionVerifier, VerdictSummary, VerificationOutcome,
    DEFAULT_TIME_LIMIT_SECONDS,
};
use aigsynth::strategy::{build_solution, ExtractOptions};
use aigsynth::verify::{
    check_invariant, check_syntactic, explicit_game_oracle, model_check_forward, Verdict,
    VerifyLimits,
};

fn criterion<F>(number: usize, name: &str, check: F)
where
    F: FnOnce() + panic::UnwindSafe,
{
    let outcome = panic::catch_unwind(check);
    match &outcome {
        Ok(()) => println!("[PASS] criterion {number}: {name}"),
        Err(_) => println!("[FAIL] criterion {number}: {name}"),
    }
    if let Err(payload) = outcome {
        panic::resume_unwind(payload);
    }
}

const CORPUS_SEED: u64 = 61;
const CORPUS_SIZE: usize = 500;

/// Shared random-spec corpus; criteria 1 and 2 regenerate it identically.
fn corpus() -> Vec<AigCircuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    let params = RandomCircuitParams::default();
    (0..CORPUS_SIZE).map(|_| random_circuit(&mut rng, &params)).collect()
}

fn state_assignment(game: &SafetyGame, state: usize) -> HashMap<BddVar, bool> {
    game.latch_vars
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, state >> i & 1 == 1))
        .collect()
}

fn build(m: &mut BddManager, formula: &Formula, vars: &[BddVar]) -> NodeRef {
    match formula {
        Formula::Const(value) => m.constant(*value),
        Formula::Var(index) => m.var_node(vars[*index]),
        Formula::Not(inner) => {
            let a = build(m, inner, vars);
            m.not(a)
        }
        Formula::And(lhs, rhs) => {
            let a = build(m, lhs, vars);
            let b = build(m, rhs, vars);
            m.and(a, b)
        }
        Formula::Or(lhs, rhs) => {
            let a = build(m, lhs, vars);
            let b = build(m, rhs, vars);
            m.or(a, b)
        }
        Formula::Xor(lhs, rhs) => {
            let a = build(m, lhs, vars);
            let b = build(m, rhs, vars);
            m.xor(a, b)
        }
    }
}

#[test]
fn criterion_1_solver_verdicts_match_the_explicit_oracle() {
    criterion(1, "solver matches the explicit oracle on 500 random specs", || {
        let started = Instant::now();
        for (index, circuit) in corpus().iter().enumerate() {
            let partition = partition_inputs(circuit);
            let oracle = explicit_game_oracle(circuit, &partition).unwrap();
            let options = SolverOptions::default();
            let mut m = options.manager();
            let game = build_game(&mut m, circuit, &partition);
            let result = solve(&mut m, &game, &options).unwrap();
            assert_eq!(result.realizable, oracle.realizable, "spec {index}");
            for state in 0..1usize << game.latch_vars.len() {
                assert_eq!(
                    m.eval(result.winning_region, &state_assignment(&game, state)),
                    oracle.winning_states[state],
                    "spec {index}, state {state}"
                );
            }
        }
        assert!(started.elapsed() < Duration::from_secs(120), "over the two minute budget");
    });
}

#[test]
fn criterion_2_every_realizable_spec_synthesizes_a_certified_solution() {
    criterion(2, "synthesized solutions pass all three checks on the corpus", || {
        let started = Instant::now();
        let mut realizable_count = 0usize;
        for (index, circuit) in corpus().iter().enumerate() {
            let partition = partition_inputs(circuit);
            let options = SolverOptions::default();
            let mut m = options.manager();
            let game = build_game(&mut m, circuit, &partition);
            let result = solve(&mut m, &game, &options).unwrap();
            if !result.realizable {
                continue;
            }
            realizable_count += 1;
            let solution = build_solution(
                &mut m,
                circuit,
                &partition,
                &game,
                result.winning_region,
                &ExtractOptions::default(),
            );
            assert!(
                check_syntactic(circuit, &solution.circuit).is_clean(),
                "spec {index}: interface"
            );
            assert!(
                matches!(
                    check_invariant(&solution.circuit, &solution.witness),
                    Ok(Verdict::Verified)
                ),
                "spec {index}: witness"
            );
            assert_eq!(
                model_check_forward(&solution.circuit, &VerifyLimits::default()),
                Verdict::Verified,
                "spec {index}: model check"
            );
        }
        assert!(realizable_count > 0, "corpus must contain realizable specs");
        assert!(started.elapsed() < Duration::from_secs(300), "over the five minute budget");
    });
}

#[test]
fn criterion_3_bdd_operations_agree_with_the_truth_table_oracle() {
    criterion(3, "canonicity, fused quantification, and composition on 1000 pairs", || {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for round in 0..1000 {
            let num_vars = rng.gen_range(1..=8);
            let f_formula = random_formula(&mut rng, num_vars, 5);
            let g_formula = random_formula(&mut rng, num_vars, 5);
            let mut m = BddManager::new();
            let vars: Vec<BddVar> = (0..num_vars).map(|_| m.add_var()).collect();
            let f = build(&mut m, &f_formula, &vars);
            let g = build(&mut m, &g_formula, &vars);

            let same_function =
                truth_table(&f_formula, num_vars) == truth_table(&g_formula, num_vars);
            assert_eq!(f == g, same_function, "round {round}: canonicity");

            let subset: Vec<BddVar> =
                vars.iter().copied().filter(|_| rng.gen::<bool>()).collect();
            let fused = m.and_exists(f, g, &subset);
            let conjunction = m.and(f, g);
            let two_step = m.quantify(conjunction, &subset, Quant::Exists);
            assert_eq!(fused, two_step, "round {round}: and_exists");

            let mut images: Vec<(usize, Formula)> = Vec::new();
            let mut substitution: Vec<(BddVar, NodeRef)> = Vec::new();
            for (position, &var) in vars.iter().enumerate() {
                if rng.gen_bool(0.4) {
                    let formula = random_formula(&mut rng, num_vars, 3);
                    let node = build(&mut m, &formula, &vars);
                    substitution.push((var, node));
                    images.push((position, formula));
                }
            }
            let composed = m.vector_compose(f, &substitution);
            for index in 0..1usize << num_vars {
                let bits = assignment_bits(index, num_vars);
                let mut modified = bits.clone();
                for (position, formula) in &images {
                    modified[*position] = formula.eval(&bits);
                }
                let assignment: HashMap<BddVar, bool> =
                    vars.iter().copied().zip(bits.iter().copied()).collect();
                assert_eq!(
                    m.eval(composed, &assignment),
                    f_formula.eval(&modified),
                    "round {round}, assignment {index}: vector_compose"
                );
            }
        }
    });
}

#[test]
fn criterion_4_sifting_preserves_functions_and_shrinks_the_interleaving() {
    criterion(4, "reordering is semantics-preserving and never grows the table", || {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        for round in 0..100 {
            let num_vars = rng.gen_range(2..=8);
            let formula = random_formula(&mut rng, num_vars, 5);
            let mut m = BddManager::new();
            let vars: Vec<BddVar> = (0..num_vars).map(|_| m.add_var()).collect();
            let node = build(&mut m, &formula, &vars);
            m.ref_node(node);
            m.collect_garbage();
            let live_before = m.live_node_count();
            let table_before: Vec<bool> = (0..1usize << num_vars)
                .map(|index| {
                    let bits = assignment_bits(index, num_vars);
                    let assignment: HashMap<BddVar, bool> =
                        vars.iter().copied().zip(bits).collect();
                    m.eval(node, &assignment)
                })
                .collect();
            m.sift_reorder();
            assert!(
                m.live_node_count() <= live_before,
                "round {round}: sifting grew the table"
            );
            for index in 0..1usize << num_vars {
                let bits = assignment_bits(index, num_vars);
                let assignment: HashMap<BddVar, bool> =
                    vars.iter().copied().zip(bits).collect();
                assert_eq!(m.eval(node, &assignment), table_before[index], "round {round}");
            }
        }

        // (x1 y1)+(x2 y2)+(x3 y3) declared with the x block before the y
        // block; pairing the variables is strictly smaller.
        let mut m = BddManager::new();
        let vars: Vec<BddVar> = (0..6).map(|_| m.add_var()).collect();
        let mut f = m.constant(false);
        for (x, y) in [(0, 3), (1, 4), (2, 5)] {
            let nx = m.var_node(vars[x]);
            let ny = m.var_node(vars[y]);
            let conjunction = m.and(nx, ny);
            f = m.or(f, conjunction);
        }
        m.ref_node(f);
        m.collect_garbage();
        let before = m.node_count(f);
        m.sift_reorder();
        assert!(m.node_count(f) < before, "interleaving function must shrink");
    });
}

fn judged(config: &str, benchmark: &str, judgment: Judgment) -> JudgedRecord {
    JudgedRecord {
        run: RunRecord {
            config_id: config.to_string(),
            benchmark: benchmark.into(),
            mode: ExecutionMode::Sequential,
            cpu_seconds: 1.0,
            wall_seconds: 1.0,
            outcome: RunOutcome::Answered { realizable: true, solution: None },
        },
        category: "default".to_string(),
        judgment,
        verdict: None,
        strategy_size: None,
    }
}

fn answered(config: &str, benchmark: &str, realizable: bool) -> RunRecord {
    RunRecord {
        config_id: config.to_string(),
        benchmark: benchmark.into(),
        mode: ExecutionMode::Sequential,
        cpu_seconds: 1.0,
        wall_seconds: 1.0,
        outcome: RunOutcome::Answered { realizable, solution: None },
    }
}

struct NoSolutions;

impl SolutionVerifier for NoSolutions {
    fn verify(&mut self, _spec: &Path, _solution: &Path) -> VerificationOutcome {
        VerificationOutcome { verdict: VerdictSummary::Inconclusive, strategy_size: None }
    }
}

#[test]
fn criterion_5_protocol_constants_and_judging_semantics() {
    criterion(5, "default limit, penalty scoring, and majority judging", || {
        assert_eq!(DEFAULT_TIME_LIMIT_SECONDS, 3600);

        let mut records: Vec<JudgedRecord> = (0..10)
            .map(|i| judged("solver", &format!("b{i}.aag"), Judgment::Correct))
            .collect();
        records.push(judged("solver", "b10.aag", Judgment::Wrong));
        let board = score(records);
        assert_eq!(board.configs.len(), 1);
        assert_eq!(board.configs[0].points, 6, "10 correct and 1 wrong");

        let library = vec![BenchmarkRecord {
            path: "b.aag".into(),
            category: "default".to_string(),
            known_status: KnownStatus::Unknown,
            difficulty: 0.5,
        }];
        for majority_says_realizable in [true, false] {
            let runs = vec![
                answered("a", "b.aag", majority_says_realizable),
                answered("b", "b.aag", majority_says_realizable),
                answered("c", "b.aag", majority_says_realizable),
                answered("d", "b.aag", !majority_says_realizable),
            ];
            let verdicts = judge(runs, &library, &mut NoSolutions);
            assert_eq!(verdicts.len(), 4);
            for record in &verdicts {
                let expected = if record.run.config_id == "d" {
                    Judgment::Wrong
                } else {
                    Judgment::Correct
                };
                assert_eq!(
                    record.judgment, expected,
                    "majority={majority_says_realizable}, config {}",
                    record.run.config_id
                );
            }
        }
    });
}

/// Per-family instance quotas for a full campaign selection; totals 234.
fn competition_quotas() -> BTreeMap<String, usize> {
    [
        ("AMBA", 16),
        ("(Washing) Cycle Scheduling", 16),
        ("Demo (LTL2AIG)", 16),
        ("Driver Synthesis", 16),
        ("Factory Assembly Line", 15),
        ("Genbuf", 16),
        ("HWMCC", 16),
        ("HyperLTL", 16),
        ("Load Balancer (LTL2AIG)", 16),
        ("LTL2DBA/LTL2DPA", 16),
        ("Moving Obstacle", 16),
        ("Matrix Multiplication", 16),
        ("Genbuf (LTL2AIG)", 8),
        ("Add", 5),
        ("Count", 5),
        ("Bitshift", 5),
        ("Mult", 5),
        ("Mv/Mvs", 5),
        ("Stay", 5),
        ("Huffman Encoder", 5),
    ]
    .into_iter()
    .map(|(name, quota)| (name.to_string(), quota))
    .collect()
}

#[test]
fn criterion_6_selection_hits_every_quota_deterministically() {
    criterion(6, "benchmark selection returns exactly 234 with per-family quotas", || {
        let quotas = competition_quotas();
        assert_eq!(quotas.values().sum::<usize>(), 234);

        let mut library = Vec::new();
        for (category, &quota) in &quotas {
            let available = quota + 8;
            for index in 0..available {
                library.push(BenchmarkRecord {
                    path: format!("{category}/{index:03}.aag").into(),
                    category: category.clone(),
                    known_status: KnownStatus::Unknown,
                    difficulty: index as f64 / (available - 1) as f64,
                });
            }
        }

        let selected = select_benchmarks(&library, &quotas, 2016).unwrap();
        assert_eq!(selected.len(), 234);
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for record in &selected {
            *counts.entry(record.category.clone()).or_default() += 1;
        }
        assert_eq!(counts, quotas);
        assert_eq!(counts["AMBA"], 16);
        assert_eq!(counts["Add"], 5);

        let replay = select_benchmarks(&library, &quotas, 2016).unwrap();
        assert_eq!(selected, replay, "same seed must reproduce the selection");
    });
}

const GOLDEN_FILES: [(&str, &str); 4] = [
    (
        "combinational",
        "aag 3 2 0 1 1\n2\n4\n6\n6 2 4\ni0 u\ni1 controllable_c\no0 err\n",
    ),
    (
        "named one-bit counter",
        "aag 3 1 1 1 1\n2\n4 6\n6\n6 2 4\ni0 tick\nl0 count\no0 err\nc\nsaturating counter\n",
    ),
    ("constant witness", "aag 0 0 0 1 0\n1\no0 winning_region\n"),
    ("exotic resets", "aag 2 0 2 1 0\n2 3 1\n4 4 4\n2\n"),
];

#[test]
fn criterion_7_serialization_round_trips_and_matches_goldens() {
    criterion(7, "parse/serialize identity on 200 random circuits and goldens", || {
        let mut rng = ChaCha8Rng::seed_from_u64(107);
        let params = RandomCircuitParams {
            max_latches: 8,
            max_uncontrollable: 4,
            max_controllable: 4,
            max_ands: 30,
        };
        for round in 0..200 {
            let mut circuit = random_circuit(&mut rng, &params);
            if round % 3 == 0 {
                circuit.comments.push("generated fixture".to_string());
                circuit.comments.push(format!("round: {round}"));
            }
            let text = serialize_ascii(&circuit);
            let parsed = parse_ascii(&text).unwrap_or_else(|e| panic!("round {round}: {e}"));
            assert_eq!(parsed, circuit, "round {round}: structure");
            assert_eq!(serialize_ascii(&parsed), text, "round {round}: bytes");
        }

        for (name, golden) in GOLDEN_FILES {
            let parsed = parse_ascii(golden).unwrap_or_else(|e| panic!("golden {name}: {e}"));
            assert_eq!(serialize_ascii(&parsed), golden, "golden {name}");
        }
    });
}

#[test]
fn criterion_8_counters_solve_within_budget_across_bitwidths() {
    criterion(8, "counter specs solve correctly within 60 seconds per width", || {
        for bits in 2..=12u32 {
            for controllable_reset in [true, false] {
                let circuit = counter_spec(bits, controllable_reset);
                let partition = partition_inputs(&circuit);
                let options = SolverOptions {
                    deadline: Some(Instant::now() + Duration::from_secs(60)),
                    ..SolverOptions::default()
                };
                let started = Instant::now();
                let mut m = options.manager();
                let game = build_game(&mut m, &circuit, &partition);
                let result = solve(&mut m, &game, &options)
                    .unwrap_or_else(|e| panic!("bits {bits}, reset {controllable_reset}: {e}"));
                assert!(started.elapsed() < Duration::from_secs(60), "bits {bits}");
                assert_eq!(result.realizable, controllable_reset, "bits {bits}");

                if bits <= 6 {
                    let oracle = explicit_game_oracle(&circuit, &partition).unwrap();
                    assert_eq!(result.realizable, oracle.realizable, "bits {bits}");
                    for state in 0..1usize << game.latch_vars.len() {
                        assert_eq!(
                            m.eval(result.winning_region, &state_assignment(&game, state)),
                            oracle.winning_states[state],
                            "bits {bits}, state {state}"
                        );
                    }
                } else if controllable_reset {
                    let solution = build_solution(
                        &mut m,
                        &circuit,
                        &partition,
                        &game,
                        result.winning_region,
                        &ExtractOptions::default(),
                    );
                    assert!(check_syntactic(&circuit, &solution.circuit).is_clean());
                    assert!(
                        matches!(
                            check_invariant(&solution.circuit, &solution.witness),
                            Ok(Verdict::Verified)
                        ),
                        "bits {bits}: witness check"
                    );
                }
            }
        }
    });
}
