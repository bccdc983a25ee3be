//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the report reads top to bottom; exits non-zero if any check
//! fails.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use hintlab_core::analysis::{
    alignment_report, chi_squared_2x2, mann_whitney_with, pearson, Condition, HintFeedback, Outcome, PMethod,
    PreQuizSurvey, StudyLog, StudyRecord, STUDY_LOG_SCHEMA,
};
use hintlab_core::client::stub::StubTransport;
use hintlab_core::client::{EndpointTable, ModelClient, RetryPolicy};
use hintlab_core::dataset::SubjectMix;
use hintlab_core::hints::{HintChain, HintStrategy};
use hintlab_core::metrics::{
    aggregate, readability_of_text, redundancy, redundancy_of_embeddings, rouge_l_recall, ChainMetricReport,
    MetricRow, TextCounts,
};
use hintlab_quiz::simulate::{Observed, Participant, RunEnd};
use hintlab_quiz::store::SessionStore;
use hintlab_quiz::{FileStore, QuizApi, QuizClient, QuizService, QuizSession, SectionPlan, ServiceConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

// ---------------------------------------------------------------- aggregate

fn aggregate_identity() -> Check {
    let started = Instant::now();
    let text = include_str!("fixtures/reference_tables.csv");
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let num = |i: usize| cells[i].parse::<f64>().map_err(|e| format!("{line}: {e}"));
        let recomputed = aggregate(num(3)?, num(5)?, num(4)?, num(7)?);
        let diff = (recomputed - num(9)?).abs();
        ensure(diff <= 0.002, || format!("{} {}: {recomputed:.5} vs {}", cells[0], cells[1], cells[9]))?;
        worst = worst.max(diff);
        rows += 1;
    }
    ensure(rows == 36, || format!("expected 36 rows, found {rows}"))?;
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("{rows} rows, worst |diff| = {worst:.5} (tol 0.002); {:.3}s", elapsed.as_secs_f64()))
}

// -------------------------------------------------------------------- rouge

/// Longest common subsequence by trying every subsequence of the reference.
fn brute_lcs(candidate: &[u8], reference: &[u8]) -> usize {
    let n = reference.len();
    (0u32..1 << n)
        .filter(|mask| {
            let sub: Vec<u8> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| reference[i]).collect();
            let mut it = candidate.iter();
            sub.iter().all(|t| it.any(|c| c == t))
        })
        .map(|mask| mask.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

fn rouge_oracle() -> Check {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..1000 {
        let vocab = rng.random_range(2..=6u8);
        let c: Vec<u8> = (0..rng.random_range(0..=12)).map(|_| rng.random_range(0..vocab)).collect();
        let r: Vec<u8> = (0..rng.random_range(1..=8)).map(|_| rng.random_range(0..vocab)).collect();
        let got = rouge_l_recall(&c, &r).map_err(|e| e.to_string())?;
        let want = brute_lcs(&c, &r) as f64 / r.len() as f64;
        ensure((got - want).abs() < 1e-12, || format!("pair {i}: {c:?} / {r:?}: {got} vs {want}"))?;
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("1000 random pairs, |reference| <= 8, exact agreement; {:.3}s", elapsed.as_secs_f64()))
}

// -------------------------------------------------------------- readability

fn readability_fixtures() -> Check {
    let r = readability_of_text("The cat sat.").map_err(|e| e.to_string())?;
    let fk = 0.39 * 3.0 + 11.8 * 1.0 - 15.59;
    ensure((r.fk_grade - fk).abs() < 1e-6, || format!("fk {}", r.fk_grade))?;
    ensure((r.fk_grade - -2.62).abs() < 1e-6, || format!("fk {}", r.fk_grade))?;
    ensure((r.fre - 119.19).abs() < 1e-6, || format!("fre {}", r.fre))?;
    ensure((r.dale_chall - 0.0496 * 3.0).abs() < 1e-6, || format!("dale-chall {}", r.dale_chall))?;

    // two sentences, eight words, one unfamiliar word
    let text = "Plants need light. Chlorophyll makes leaves look green.";
    let c = TextCounts::of(text);
    ensure(c.words == 8 && c.sentences == 2 && c.difficult == 1, || format!("counts {c:?}"))?;
    let r = readability_of_text(text).map_err(|e| e.to_string())?;
    let (wps, spw) = (4.0, c.syllables as f64 / 8.0);
    let dc = 0.1579 * 12.5 + 0.0496 * wps + 3.6365;
    ensure((r.dale_chall - dc).abs() < 1e-6, || format!("dale-chall {} vs {dc}", r.dale_chall))?;
    ensure((r.fre - (206.835 - 1.015 * wps - 84.6 * spw)).abs() < 1e-6, || format!("fre {}", r.fre))?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let words = rng.random_range(1..200usize);
        let sentences = rng.random_range(1..=words);
        let syllables = rng.random_range(words..=3 * words);
        let base = TextCounts { words, sentences, syllables, difficult: 0 };
        let more = TextCounts { syllables: syllables + rng.random_range(1..=words), ..base };
        let (a, b) = (base.scores().unwrap(), more.scores().unwrap());
        ensure(b.fre < a.fre && b.fk_grade > a.fk_grade, || format!("not monotone at {base:?}"))?;
    }
    Ok("fk -2.62 (stated -3.62; the formula with W=3,S=1,Y=3 gives -2.62), fre 119.19, dale-chall fixtures within 1e-6; 1000 monotone perturbations".into())
}

// --------------------------------------------------------------- redundancy

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
    v.into_iter().map(|x| x / n).collect()
}

fn vectors_with_cosines(c12: f64, c13: f64, c23: f64) -> Vec<Vec<f64>> {
    let l22 = (1.0 - c12 * c12).sqrt();
    let l32 = (c23 - c13 * c12) / l22;
    let l33 = (1.0 - c13 * c13 - l32 * l32).sqrt();
    vec![vec![1.0, 0.0, 0.0], vec![c12, l22, 0.0], vec![c13, l32, l33]]
}

async fn redundancy_checks() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..200 {
        let k = rng.random_range(1..=4usize);
        let mut chain: Vec<Vec<f64>> = (0..k).map(|_| random_unit(&mut rng, 8)).collect();
        let r = redundancy_of_embeddings(&chain).map_err(|e| e.to_string())?;
        chain.shuffle(&mut rng);
        let shuffled = redundancy_of_embeddings(&chain).map_err(|e| e.to_string())?;
        ensure((r - shuffled).abs() < 1e-12, || format!("chain {i}: order changed {r} to {shuffled}"))?;
        if k == 1 {
            ensure(r == 0.0, || format!("chain {i}: single hint scored {r}"))?;
        }
        let same = vec![chain[0].clone(); k.max(2)];
        let s = redundancy_of_embeddings(&same).map_err(|e| e.to_string())?;
        ensure((s - 1.0).abs() < 1e-12, || format!("chain {i}: identical hints scored {s}"))?;
    }

    // the worked example, through the client with a scripted embedder
    let vs = vectors_with_cosines(0.5, 0.2, 0.4);
    let embed = move |t: &str| match t {
        "first" => vs[0].clone(),
        "second" => vs[1].clone(),
        _ => vs[2].clone(),
    };
    let client = ModelClient::with_transport(EndpointTable::all_mock(), Arc::new(StubTransport::new().with_embed(embed)))
        .retry(RetryPolicy::none());
    let chain = HintChain::from_texts("q", HintStrategy::Static, &["first", "second", "third"]);
    let r = redundancy(&client, &chain).await.map_err(|e| e.to_string())?;
    ensure((r - 1.4 / 3.0).abs() < 1e-6, || format!("worked example {r}"))?;
    Ok(format!("200 random chains invariant; worked example {r:.6} (stated 0.4667)"))
}

// --------------------------------------------------------------- statistics

fn pairwise_u(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| (x, y)))
        .map(|(x, y)| if x > y { 1.0 } else if x == y { 0.5 } else { 0.0 })
        .sum()
}

/// Two-sided p from relabelling every subset of the pooled values.
fn enumerated_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let centre = a.len() as f64 * b.len() as f64 / 2.0;
    let observed = (pairwise_u(a, b) - centre).abs();
    let (mut extreme, mut total) = (0usize, 0usize);
    for mask in 0u32..1 << pooled.len() {
        if mask.count_ones() as usize != a.len() {
            continue;
        }
        let (mut ga, mut gb) = (Vec::new(), Vec::new());
        for (i, v) in pooled.iter().enumerate() {
            if mask & (1 << i) != 0 {
                ga.push(*v)
            } else {
                gb.push(*v)
            }
        }
        total += 1;
        extreme += ((pairwise_u(&ga, &gb) - centre).abs() >= observed - 1e-9) as usize;
    }
    extreme as f64 / total as f64
}

fn statistics() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut cases = 0;
    for na in 1..=6 {
        for nb in 1..=6 {
            for _ in 0..4 {
                let a: Vec<f64> = (0..na).map(|_| f64::from(rng.random_range(1..=5u8))).collect();
                let b: Vec<f64> = (0..nb).map(|_| f64::from(rng.random_range(1..=5u8))).collect();
                let m = mann_whitney_with(&a, &b, PMethod::Exact).map_err(|e| e.to_string())?;
                let (u, p) = (pairwise_u(&a, &b), enumerated_p(&a, &b));
                ensure((m.u - u).abs() < 1e-9, || format!("{a:?} vs {b:?}: U {} vs {u}", m.u))?;
                ensure((m.p_two_sided - p).abs() < 1e-9, || format!("{a:?} vs {b:?}: p {} vs {p}", m.p_two_sided))?;
                cases += 1;
            }
        }
    }

    let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).map_err(|e| e.to_string())?;
    ensure((r - 0.8).abs() < 1e-9, || format!("pearson {r}"))?;

    let chi = chi_squared_2x2([[12, 8], [6, 14]], false).map_err(|e| e.to_string())?;
    ensure((chi.chi2 - 40.0 / 11.0).abs() < 1e-9, || format!("chi2 {}", chi.chi2))?;

    let mut tables = 0;
    for _ in 0..1000 {
        let t = [[rng.random_range(0..80u64), rng.random_range(0..80)], [rng.random_range(0..80), rng.random_range(0..80)]];
        if let Ok(c) = chi_squared_2x2(t, rng.random_bool(0.5)) {
            ensure((0.0..=1.0).contains(&c.cramers_v), || format!("{t:?}: V = {}", c.cramers_v))?;
            tables += 1;
        }
    }
    Ok(format!(
        "U and exact p match enumeration on {cases} samples (sizes 1..=6); pearson 0.8; chi2 {:.6} = 40/11 (stated 3.6; expecteds 9/11/9/11 give 40/11); V in [0,1] on {tables} tables",
        chi.chi2
    ))
}

// ----------------------------------------------------------------- protocol

async fn start(service: Arc<QuizService>) -> (String, tokio::task::JoinHandle<()>) {
    let (tx, rx) = tokio::sync::oneshot::channel();
    let addr = "127.0.0.1:0".parse().unwrap();
    let handle = tokio::spawn(async move {
        hintlab_quiz::http::serve(service, addr, |a| tx.send(a).unwrap()).await.unwrap();
    });
    (format!("http://{}", rx.await.unwrap()), handle)
}

fn quiz_service(store: &Path) -> Result<Arc<QuizService>, String> {
    let client = Arc::new(ModelClient::from_table(EndpointTable::all_mock()));
    let store: Arc<dyn SessionStore> = Arc::new(FileStore::open(store).map_err(|e| e.to_string())?);
    QuizService::builder(client)
        .quiz_file(&repo_root().join("data/quiz_set.jsonl"), &SubjectMix::study_default())
        .store(store)
        .config(ServiceConfig { seed: 9, snapshot_every: 6, generation_retries: 1 })
        .build()
        .map(Arc::new)
        .map_err(|e| e.to_string())
}

async fn protocol() -> Check {
    let started = Instant::now();
    let questions = hintlab_core::dataset::quiz_set(repo_root().join("data/quiz_set.jsonl"), &SubjectMix::study_default())
        .map_err(|e| e.to_string())?;
    let ids: Vec<String> = questions.iter().map(|q| q.id.clone()).collect();
    let mut static_first = 0;
    for seed in 0..200 {
        let plan = SectionPlan::draw(seed, &ids).map_err(|e| e.to_string())?;
        ensure(plan.sections[0] == Condition::Control, || format!("seed {seed}: section 1 not control"))?;
        static_first += plan.static_first() as usize;
    }
    ensure((70..=130).contains(&static_first), || format!("static first in {static_first} of 200 plans"))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = quiz_service(dir.path())?;
    let (url, server) = start(first.clone()).await;
    let client = QuizClient::new(&url);
    let player = Participant::new(&client, &questions);
    let id = player.join("acceptance", Some(21)).await.map_err(|e| e.to_string())?;
    let mut seen = Observed::default();
    // part-way into section 2
    ensure(player.run(&id, Some(40), &mut seen).await.map_err(|e| e.to_string())? == RunEnd::Paused, || "finished early".into())?;
    let state = client.state(&id).await.map_err(|e| e.to_string())?;
    let current = client.current(&id).await.map_err(|e| e.to_string())?;
    let snapshot = first.snapshot(&id).await.map_err(|e| e.to_string())?;
    ensure(state.sections[0].complete && !state.sections[1].complete, || "not mid-section 2".into())?;
    server.abort();
    let _ = server.await;
    drop(first);

    let stored = FileStore::open(dir.path()).map_err(|e| e.to_string())?.load_all().map_err(|e| e.to_string())?;
    let replayed = QuizSession::replay(&stored[0].events).map_err(|e| e.to_string())?;
    ensure(replayed == snapshot, || "event log replays to a different state".into())?;
    let second = quiz_service(dir.path())?;
    ensure(second.snapshot(&id).await.map_err(|e| e.to_string())? == snapshot, || "restart changed the session".into())?;
    let (url, server) = start(second).await;
    let client = QuizClient::new(&url);
    ensure(client.state(&id).await.map_err(|e| e.to_string())? == state, || "state differs after restart".into())?;
    ensure(client.current(&id).await.map_err(|e| e.to_string())? == current, || "screen differs after restart".into())?;
    let player = Participant::new(&client, &questions);
    ensure(player.run(&id, None, &mut seen).await.map_err(|e| e.to_string())? == RunEnd::Done, || "did not finish".into())?;

    ensure(seen.rejected("hints_disabled") == 10, || format!("control denials {}", seen.rejected("hints_disabled")))?;
    ensure(seen.rejected("hint_budget_exhausted") >= 1, || "fifth hint was not refused".into())?;
    ensure(seen.rejected("question_closed") >= 1, || "sixth attempt was not refused".into())?;
    ensure(seen.rejected("conflict") >= 1, || "premature feedback was not refused".into())?;
    let replay = client.replay(&id).await.map_err(|e| e.to_string())?;
    let order: BTreeSet<Condition> = replay.sections[1..].iter().map(|s| s.condition).collect();
    ensure(
        replay.sections[0].condition == Condition::Control && order == BTreeSet::from([Condition::Static, Condition::Dynamic]),
        || "sections are not control then a static/dynamic permutation".into(),
    )?;

    let log = StudyLog::parse(&client.export(None).await.map_err(|e| e.to_string())?)?;
    let mut summaries = 0;
    for r in &log.records {
        match r {
            StudyRecord::QuestionSummary { condition, outcome, attempts_used, hints_shown, question, .. } => {
                summaries += 1;
                ensure(*hints_shown <= 4 && *attempts_used <= 5, || format!("{question}: over budget"))?;
                ensure(*condition != Condition::Control || *hints_shown == 0, || format!("{question}: control hint"))?;
                ensure(*outcome != Outcome::Open, || format!("{question}: left open"))?;
            }
            StudyRecord::Hint { question, satisfaction, informative, leaked, .. } => {
                ensure(satisfaction.is_some() && informative.is_some() && leaked.is_some(), || format!("{question}: hint without feedback"))?;
            }
            _ => {}
        }
    }
    ensure(summaries == 30, || format!("{summaries} question summaries"))?;
    server.abort();
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "30 questions over HTTP with a restart mid-section 2; {} hints, {} attempts, refusals {:?}; {:.1}s",
        seen.hints,
        seen.attempts,
        seen.rejections,
        elapsed.as_secs_f64()
    ))
}

// -------------------------------------------------------------- determinism

fn bench_config(dir: &Path) -> PathBuf {
    let dataset = repo_root().join("data/sciq_sample.jsonl");
    let mut text = format!("dataset = {:?}\nstrategy = \"both\"\nseed = 7\nlimit = 20\n", dataset.display().to_string());
    for (role, model) in [
        ("generator", "mock-generator"),
        ("qa_evaluator", "mock-qa"),
        ("leakage_judge", "mock-judge"),
        ("embedder", "mock-embedder"),
    ] {
        text.push_str(&format!("\n[endpoints.{role}]\ntransport = \"mock\"\nmodel_id = \"{model}\"\n"));
    }
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn hintlab(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hintlab"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("hintlab {args:?}: {}", String::from_utf8_lossy(&out.stderr)))?;
    Ok(out.stdout)
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = bench_config(dir.path());
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let out_s = out.to_str().unwrap();
        let stdout = hintlab(&["bench", "run", "--config", config.to_str().unwrap(), "--out", out_s])?;
        let pareto = hintlab(&["bench", "pareto", "--out", out_s])?;
        let pareto_2 = hintlab(&["bench", "pareto", "--out", out_s, "--x", "Redundancy", "--y", "Consistency"])?;
        let files: Vec<Vec<u8>> = ["table.txt", "table.csv", "rows.jsonl"]
            .iter()
            .map(|f| std::fs::read(out.join(f)).unwrap())
            .collect();
        runs.push((stdout, pareto, pareto_2, files));
    }
    ensure(runs[0] == runs[1], || "the two runs differ".into())?;
    let csv = String::from_utf8_lossy(&runs[0].3[1]).to_string();
    let lines: Vec<&str> = csv.lines().collect();
    ensure(lines.len() == 3, || format!("expected two table rows, got {}", lines.len() - 1))?;
    ensure(lines[1..].iter().all(|l| l.split(',').nth(2) == Some("20")), || format!("question counts: {csv}"))?;
    let rows = String::from_utf8_lossy(&runs[0].3[2]).lines().count();
    ensure(rows == 40, || format!("{rows} metric rows"))?;
    Ok("bench run x2 over 20 questions, both strategies: tables, rows and pareto output byte-identical".into())
}

// ---------------------------------------------------------------- alignment

fn report(leakage_em: u8, leakage_llm: u8) -> ChainMetricReport {
    ChainMetricReport {
        info_gain_mean: 0.2,
        info_gain_comb: 0.4,
        redundancy: 0.5,
        consistency: 0.3,
        leakage_em,
        leakage_em_hint_rate: leakage_em as f64,
        leakage_llm: Some(leakage_llm),
        readability: None,
        aggregate: aggregate(0.4, 0.3, 0.5, leakage_em as f64),
    }
}

fn alignment() -> Check {
    // 8 rated hints; EM flags hints 1-4, the LLM judge flags 1, 5 and 6;
    // participants report a leak on hint 1 only.
    let em = [1, 1, 1, 1, 0, 0, 0, 0];
    let llm = [1, 0, 0, 0, 1, 1, 0, 0];
    let mut records = vec![
        StudyRecord::Header { schema: STUDY_LOG_SCHEMA.into(), sessions: 1 },
        StudyRecord::PreQuiz { session: "s".into(), participant: "p".into(), survey: PreQuizSurvey::default() },
    ];
    let mut rows = Vec::new();
    for i in 0..8 {
        let question = format!("q{}", i / 4);
        let hint_index = i % 4 + 1;
        let fb = HintFeedback { satisfaction: (i % 5 + 1) as u8, informative: i % 2 == 0, leaked: i == 0 };
        records.push(StudyRecord::Hint {
            session: "s".into(),
            question: question.clone(),
            section: 2,
            strategy: HintStrategy::Static,
            hint_index,
            text: format!("hint {i}"),
            satisfaction: Some(fb.satisfaction),
            informative: Some(fb.informative),
            leaked: Some(fb.leaked),
            attempts_before_hint: 0,
        });
        rows.push(MetricRow {
            question_id: question,
            session_id: Some("s".into()),
            hint_index: Some(hint_index),
            model_id: "m".into(),
            strategy: HintStrategy::Static,
            hints: vec![format!("hint {i}")],
            report: report(em[i], llm[i]),
            flags: Vec::new(),
        });
    }
    let text: String = records.iter().map(|r| r.to_line()).collect();
    let log = StudyLog::parse(&text)?;
    let r = alignment_report(&log, &rows).map_err(|e| e.to_string())?;
    let em = &r.leakage["Leakage_EM"];
    let llm = &r.leakage["Leakage_LLM"];
    ensure(r.joined == 8, || format!("joined {}", r.joined))?;
    ensure(em.precision == Some(0.25) && em.recall == Some(1.0), || format!("EM {em:?}"))?;
    ensure(llm.precision == Some(1.0 / 3.0) && llm.recall == Some(1.0), || format!("LLM {llm:?}"))?;
    Ok("engineered EM precision/recall 0.25/1.0 and LLM 1/3/1.0 reproduced exactly; study-specific correlations need the original participant logs (reference only)".into())
}

fn not_reproducible(passed_so_far: bool) -> Check {
    ensure(passed_so_far, || "a substitute property suite failed".into())?;
    Ok("absolute per-model metric values and human-study outcomes need the original checkpoints and participants; substituted by the property checks above".into())
}

#[tokio::main]
async fn main() {
    let mut results: Vec<(&str, Check)> = vec![
        ("aggregate identity over 36 reference rows", aggregate_identity()),
        ("rouge-l recall vs subsequence oracle", rouge_oracle()),
        ("readability fixtures and monotonicity", readability_fixtures()),
        ("redundancy invariants and worked example", redundancy_checks().await),
        ("statistics vs enumeration and fixtures", statistics()),
        ("protocol conformance with crash-restart", protocol().await),
        ("bench run end-to-end determinism", determinism()),
        ("alignment harness on an engineered log", alignment()),
    ];
    let all_ok = results.iter().all(|(_, r)| r.is_ok());
    results.push(("unreproducible absolute values (documented)", not_reproducible(all_ok)));

    let mut failed = 0;
    for (name, result) in &results {
        match result {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
