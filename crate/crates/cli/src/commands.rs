//! The five subcommands. Each one runs a deterministic pipeline, emits
//! plot-ready CSV and JSON files into the output directory, and finishes
//! with a manifest digesting every file it wrote.

use std::path::Path;

use walkbell_core::io::format_f64;
use walkbell_core::rng::splitmix64;
use walkbell_core::*;

use crate::config::*;
use crate::manifest::RunWriter;
use crate::CliError;

type CliResult<T> = std::result::Result<T, CliError>;

fn core_err(e: walkbell_core::Error) -> CliError {
    CliError::Run(e.to_string())
}

/// Witness record assembled from a scan candidate under fixed Schmidt-aligned
/// settings.
fn scan_witness(
    bench: &SchmidtBenchmark,
    cand: &ScanBest,
    r_norm: f64,
    t_steps: usize,
    tol: f64,
    seed: u64,
) -> CliResult<WitnessRecord> {
    let prep = BlochVector::from_direction(cand.direction, r_norm).map_err(core_err)?;
    let a0 = bench.settings.alice[0];
    let a1 = bench.settings.alice[1];
    let b0 = WalkerObservable::Embedded(bench.settings.bob[0].clone());
    let b1 = WalkerObservable::Embedded(bench.settings.bob[1].clone());
    let (report, _) =
        evaluate_witness(&prep, (&a0, &a1), (&b0, &b1), t_steps, tol).map_err(core_err)?;
    Ok(WitnessRecord {
        prep_dir: cand.direction,
        r_norm,
        coin_dirs: [a0.bloch_dir(), a1.bloch_dir()],
        walker_obs: [
            WalkerObsDescriptor::SchmidtEmbedded {
                observable: bench.settings.bob[0].clone(),
            },
            WalkerObsDescriptor::SchmidtEmbedded {
                observable: bench.settings.bob[1].clone(),
            },
        ],
        t_steps,
        tol,
        report,
        seed,
        trial: cand.dir_index,
    })
}

fn position_csv(ensemble: &EvolvedEnsemble) -> CliResult<Vec<u8>> {
    let dist = ensemble.position_distribution().map_err(core_err)?;
    let mut buf = Vec::new();
    dist.write_csv(&mut buf)
        .map_err(|e| CliError::Io(e.to_string()))?;
    Ok(buf)
}

#[derive(serde::Serialize)]
struct BenchmarkReport {
    direction: [f64; 3],
    direction_matched: bool,
    coefficient_distance: f64,
    candidates_tested: usize,
    s0: f64,
    s1: f64,
    s_max: f64,
    s_achieved: f64,
    alice_dirs: [[f64; 3]; 2],
    witness: Option<ScanBest>,
    scan_best: Option<ScanBest>,
    n_dirs: u64,
}

pub fn cmd_benchmark(cfg: &BenchmarkConfig, out_dir: &Path) -> CliResult<()> {
    let mut writer = RunWriter::new(out_dir, "benchmark", cfg, vec![cfg.seed], cfg.tol)?;
    let bench = build_benchmark(cfg.t_steps, (cfg.target_s0, cfg.target_s1), cfg.direction_tol)
        .map_err(core_err)?;
    let d = &bench.discovery;
    if !d.matched {
        eprintln!(
            "warning: no direction matched the target coefficients within {}; closest {:?} at distance {:.6} with ({:.6}, {:.6})",
            cfg.direction_tol,
            d.direction,
            d.distance,
            d.schmidt.s0(),
            d.schmidt.s1()
        );
    }
    let saturation_gap = (bench.settings.s_achieved - bench.settings.s_predicted).abs();
    if saturation_gap > cfg.saturation_tol {
        return Err(CliError::Check(format!(
            "constructed settings miss the Horodecki maximum by {saturation_gap:e} (> {:e})",
            cfg.saturation_tol
        )));
    }

    let points = benchmark_scan_r(
        cfg.t_steps,
        &bench.settings,
        &[cfg.witness_r_norm],
        cfg.witness_n_dirs,
        cfg.seed,
        cfg.tol,
        cfg.witness_margin,
    )
    .map_err(core_err)?;
    let point = &points[0];

    let report = BenchmarkReport {
        direction: d.direction,
        direction_matched: d.matched,
        coefficient_distance: d.distance,
        candidates_tested: d.candidates_tested,
        s0: d.schmidt.s0(),
        s1: d.schmidt.s1(),
        s_max: bench.settings.s_predicted,
        s_achieved: bench.settings.s_achieved,
        alice_dirs: [
            bench.settings.alice[0].bloch_dir(),
            bench.settings.alice[1].bloch_dir(),
        ],
        witness: point.best_with_margin,
        scan_best: point.best,
        n_dirs: cfg.witness_n_dirs,
    };
    writer.write_json("benchmark.json", &report)?;

    if let Some(cand) = &point.best_with_margin {
        let witness = scan_witness(
            &bench,
            cand,
            cfg.witness_r_norm,
            cfg.t_steps,
            cfg.tol,
            cfg.seed,
        )?;
        writer.write_json("witness_schmidt.json", &witness)?;
        let prep =
            BlochVector::from_direction(cand.direction, cfg.witness_r_norm).map_err(core_err)?;
        let ensemble = signed_decomposition(&prep)
            .evolve(cfg.t_steps, cfg.t_steps)
            .map_err(core_err)?;
        let csv = position_csv(&ensemble)?;
        writer.write_file("position_distribution.csv", &csv)?;
        println!(
            "benchmark: direction {:?}, (s0, s1) = ({:.6}, {:.6}), S_max = {:.6}, witness |S| = {:.6}, min p = {:.4e}",
            d.direction,
            d.schmidt.s0(),
            d.schmidt.s1(),
            bench.settings.s_predicted,
            cand.s_abs,
            cand.min_p
        );
    } else {
        eprintln!(
            "warning: no admissible witness with margin >= {} at r = {}",
            cfg.witness_margin, cfg.witness_r_norm
        );
    }
    writer.finish()?;
    Ok(())
}

pub fn cmd_scan_r(cfg: &ScanRConfig, out_dir: &Path) -> CliResult<()> {
    let grid = cfg.grid()?;
    let mut writer = RunWriter::new(out_dir, "scan-r", cfg, vec![cfg.seed], cfg.tol)?;
    let bench = build_benchmark(cfg.t_steps, (cfg.target_s0, cfg.target_s1), cfg.direction_tol)
        .map_err(core_err)?;
    let points = benchmark_scan_r(
        cfg.t_steps,
        &bench.settings,
        &grid,
        cfg.n_dirs,
        cfg.seed,
        cfg.tol,
        cfg.witness_margin,
    )
    .map_err(core_err)?;

    // One CSV per figure: CHSH level and admissibility margin of the
    // per-magnitude maximizers. Magnitudes with no admissible candidate are
    // recorded as absent points (no row).
    let mut csv = String::from("r_norm,best_S,min_p\n");
    for p in &points {
        if let Some(b) = &p.best {
            csv.push_str(&format!(
                "{},{},{}\n",
                format_f64(p.r_norm),
                format_f64(b.s_abs),
                format_f64(b.min_p)
            ));
        }
    }
    writer.write_file("s_vs_r.csv", csv.as_bytes())?;
    writer.write_file("minp_vs_r.csv", csv.as_bytes())?;
    writer.write_json("scan_points.json", &points)?;
    let shown: Vec<_> = points.iter().filter(|p| p.best.is_some()).collect();
    println!(
        "scan-r: {} magnitudes, {} with admissible candidates",
        points.len(),
        shown.len()
    );
    writer.finish()?;
    Ok(())
}

pub fn cmd_coarse(cfg: &CoarseConfig, out_dir: &Path) -> CliResult<()> {
    let mut writer = RunWriter::new(out_dir, "coarse", cfg, cfg.seeds.clone(), cfg.tol)?;
    let outcome = coarse_search(&cfg.to_search_config()).map_err(core_err)?;
    writer.write_json("best_witness.json", &outcome.best)?;
    writer.write_json("coarse_stats.json", &outcome.stats)?;

    let (report, table) = outcome.best.reevaluate(cfg.tol).map_err(core_err)?;
    let mut table_csv = Vec::new();
    table
        .write_csv(&mut table_csv)
        .map_err(|e| CliError::Io(e.to_string()))?;
    writer.write_file("best_witness_table.csv", &table_csv)?;

    let prep =
        BlochVector::from_direction(outcome.best.prep_dir, outcome.best.r_norm).map_err(core_err)?;
    let ensemble = signed_decomposition(&prep)
        .evolve(cfg.t_steps, cfg.t_steps)
        .map_err(core_err)?;
    writer.write_file("position_distribution.csv", &position_csv(&ensemble)?)?;

    println!(
        "coarse: best |S| = {:.6}, min p = {:.4e}, E = ({:.4}, {:.4}, {:.4}, {:.4}), accepted {}/{}",
        report.s.abs(),
        report.min_p,
        report.e00,
        report.e01,
        report.e10,
        report.e11,
        outcome.stats.accepted,
        outcome.stats.trials_total
    );
    writer.finish()?;
    Ok(())
}

pub fn cmd_finite_time(cfg: &FiniteTimeConfig, out_dir: &Path) -> CliResult<()> {
    let mut writer = RunWriter::new(out_dir, "finite-time", cfg, cfg.seeds.clone(), cfg.tol)?;
    let base = walkbell_core::SearchConfig {
        t_steps: 0,
        r_norm: cfg.r_norm,
        n_direction_samples: 0,
        n_trials: cfg.n_trials,
        x0_grid: cfg.x0_grid.clone(),
        seeds: cfg.seeds.clone(),
        tol: cfg.tol,
        sign_of_zero: cfg.sign_of_zero,
    };
    let sweep = finite_time_sweep(&cfg.t_list, &base).map_err(core_err)?;

    let mut best_csv = String::from("T,seed,best_S,median_S\n");
    let mut frac_csv = String::from("T,fraction_gt2\n");
    let mut minp_csv = String::from("T,median_min_p\n");
    for rec in &sweep.records {
        for seed_stat in &rec.per_seed {
            if let Some(best) = seed_stat.best_s_abs {
                best_csv.push_str(&format!(
                    "{},{},{},{}\n",
                    rec.t_steps,
                    seed_stat.seed,
                    format_f64(best),
                    format_f64(rec.median_best_s)
                ));
            }
        }
        frac_csv.push_str(&format!(
            "{},{}\n",
            rec.t_steps,
            format_f64(rec.fraction_gt2)
        ));
        minp_csv.push_str(&format!(
            "{},{}\n",
            rec.t_steps,
            format_f64(rec.median_min_p)
        ));
    }
    writer.write_file("finite_time_best.csv", best_csv.as_bytes())?;
    writer.write_file("fraction_above_classical.csv", frac_csv.as_bytes())?;
    writer.write_file("finite_time_minp.csv", minp_csv.as_bytes())?;
    writer.write_json("sweep.json", &sweep)?;

    for rec in &sweep.records {
        println!(
            "finite-time: T = {:2}, best |S| = {:.5}, median = {:.5}, fraction > 2 = {:.5}",
            rec.t_steps, rec.best_s_abs, rec.median_best_s, rec.fraction_gt2
        );
    }
    writer.finish()?;
    Ok(())
}

#[derive(serde::Serialize)]
struct EmulationRow {
    n_shots_per_branch: u64,
    empirical_var_s: f64,
    nominal_var_scale: f64,
    n_reps: u64,
}

#[derive(serde::Serialize)]
struct EmulationSummary {
    witness_s: f64,
    weights: (f64, f64),
    negativity: f64,
    rows: Vec<EmulationRow>,
    final_n_shots: u64,
    reconstructed_s: f64,
    reconstructed_s_std_err: f64,
    table: walkbell_core::JointTableRecord,
    std_err: [[f64; 4]; 4],
}

pub fn cmd_emulate(cfg: &EmulateConfig, out_dir: &Path) -> CliResult<()> {
    if cfg.witness_path.is_empty() {
        return Err(CliError::Config(
            "missing field `witness_path`: emulate needs a stored witness record".into(),
        ));
    }
    if cfg.n_shots_list.is_empty() {
        return Err(CliError::Config("field `n_shots_list` must be nonempty".into()));
    }
    let text = std::fs::read_to_string(&cfg.witness_path)
        .map_err(|e| CliError::Config(format!("cannot read witness {}: {e}", cfg.witness_path)))?;
    let witness: WitnessRecord = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("witness {}: {e}", cfg.witness_path)))?;
    let mut writer = RunWriter::new(out_dir, "emulate", cfg, vec![cfg.seed], witness.tol)?;

    let (plus, minus, weights) = witness.branch_tables().map_err(core_err)?;
    let prep =
        BlochVector::from_direction(witness.prep_dir, witness.r_norm).map_err(core_err)?;
    let negativity = negativity_cost(&prep);

    let mut rows = Vec::new();
    for (idx, &n_shots) in cfg.n_shots_list.iter().enumerate() {
        let mut values = Vec::with_capacity(cfg.n_reps as usize);
        for rep in 0..cfg.n_reps {
            let rep_seed = splitmix64(splitmix64(cfg.seed) ^ ((idx as u64) << 32 | rep));
            let out =
                emulate_shots(&plus, &minus, weights, n_shots, rep_seed).map_err(core_err)?;
            values.push(out.table.chsh());
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64
        } else {
            0.0
        };
        rows.push(EmulationRow {
            n_shots_per_branch: n_shots,
            empirical_var_s: var,
            nominal_var_scale: sampling_overhead(&prep, n_shots).map_err(core_err)?,
            n_reps: cfg.n_reps,
        });
    }

    let mut csv = String::from("n_shots_per_branch,empirical_var_S,nominal_var_scale,n_reps\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            row.n_shots_per_branch,
            format_f64(row.empirical_var_s),
            format_f64(row.nominal_var_scale),
            row.n_reps
        ));
    }
    writer.write_file("variance_vs_shots.csv", csv.as_bytes())?;

    let final_n = *cfg.n_shots_list.iter().max().expect("nonempty");
    let final_run =
        emulate_shots(&plus, &minus, weights, final_n, splitmix64(cfg.seed)).map_err(core_err)?;
    let summary = EmulationSummary {
        witness_s: witness.report.s,
        weights,
        negativity,
        rows,
        final_n_shots: final_n,
        reconstructed_s: final_run.table.chsh(),
        reconstructed_s_std_err: final_run.chsh_std_err(),
        table: final_run.table.to_record(),
        std_err: final_run.std_err,
    };
    writer.write_json("emulation.json", &summary)?;
    println!(
        "emulate: exact S = {:.6}, reconstructed S = {:.6} ± {:.3e} at {} shots/branch (N = {:.4})",
        summary.witness_s,
        summary.reconstructed_s,
        summary.reconstructed_s_std_err,
        final_n,
        negativity
    );
    writer.finish()?;
    Ok(())
}
