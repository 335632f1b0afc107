//! Command-line frontend: ingestion, distance matrices, MDS, classification,
//! benchmarking, and self-tests.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

mod config;
mod error;
mod io;
mod svg;

use clap::{Parser, Subcommand};
use config::{ConfigFile, OutputFormat, RunConfig};
use error::CliError;
use io::{sidecar_path, write_file, MatrixMetadata};
use shapesig::analysis::{
    classical_mds, distance_matrix_weighted, loo_knn_accuracy, silhouette, DistanceMethod,
};
use shapesig::mocap::{
    clip_to_curve, parse_amc, parse_asf, selected_joint_names, synth_classes, ClipRecord,
    LabeledDataset, SynthConfig,
};
use std::path::Path;

#[derive(Parser)]
#[command(
    name = "shapesig",
    version,
    about = "Shape distances for motion-capture animations: elastic (SRVT + dynamic programming) and signature-based"
)]
struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert ASF/AMC or existing clip JSON into canonical clip JSON, or
    /// generate a synthetic labeled dataset.
    Ingest {
        /// ASF skeleton file (requires --amc).
        #[arg(long)]
        asf: Option<String>,
        /// AMC motion files parsed against --asf.
        #[arg(long, num_args = 1..)]
        amc: Vec<String>,
        /// Existing clip JSON files to merge in.
        #[arg(long, num_args = 1..)]
        clips: Vec<String>,
        /// Label attached to the clips ingested from --amc.
        #[arg(long)]
        label: Option<String>,
        /// Joint subset (comma separated names).
        #[arg(long, value_delimiter = ',')]
        joints: Option<Vec<String>>,
        /// Generate a synthetic dataset instead of reading files.
        #[arg(long)]
        synth: bool,
        #[arg(long, default_value_t = 3)]
        classes: usize,
        #[arg(long, default_value_t = 10)]
        per_class: usize,
        /// Joint count for synthetic clips.
        #[arg(long, default_value_t = 5)]
        synth_joints: usize,
        #[arg(long, default_value_t = 60)]
        frames: usize,
        /// Angle noise (radians, standard deviation) for synthetic clips.
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        /// Disable the per-clip random time warps of synthetic clips.
        #[arg(long)]
        no_warps: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: String,
    },
    /// Compute a pairwise distance matrix over a clip collection.
    Distmat {
        #[arg(long)]
        clips: String,
        /// signature | srvt | srvt_dp
        #[arg(long)]
        method: Option<String>,
        /// Signature truncation level.
        #[arg(long)]
        level: Option<usize>,
        /// DP grid size M.
        #[arg(long)]
        grid: Option<usize>,
        /// DP maximum step (warp slopes confined to [1/max-step, max-step]).
        #[arg(long)]
        max_step: Option<usize>,
        /// Joint subset (comma separated names).
        #[arg(long, value_delimiter = ',')]
        joints: Option<Vec<String>>,
        /// Per-joint weights for the SRVT-family norms (comma separated).
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        /// csv | json
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        no_parallel: bool,
        #[arg(long)]
        out: String,
    },
    /// Embed a distance matrix into the plane with classical MDS.
    Mds {
        #[arg(long)]
        dist: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Clip JSON supplying labels (matched by id) for coloring.
        #[arg(long)]
        clips: Option<String>,
        #[arg(long)]
        out: String,
        /// Also write an SVG scatter plot.
        #[arg(long)]
        svg: Option<String>,
    },
    /// Leave-one-out k-NN accuracy and silhouette from a distance matrix.
    Classify {
        #[arg(long)]
        dist: String,
        #[arg(long)]
        clips: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Time each method on the same clips, single-threaded, and report the
    /// slowdown of the DP alignment relative to signatures.
    Bench {
        /// Clip JSON; a built-in synthetic dataset is used when absent.
        #[arg(long)]
        clips: Option<String>,
        /// Comma separated subset of: signature, srvt, srvt_dp.
        #[arg(long, value_delimiter = ',', default_value = "signature,srvt_dp")]
        methods: Vec<String>,
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        max_step: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the embedded property suites and report pass/fail.
    Selftest,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {}", e.message());
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file_config = ConfigFile::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest {
            asf,
            amc,
            clips,
            label,
            joints,
            synth,
            classes,
            per_class,
            synth_joints,
            frames,
            noise,
            no_warps,
            seed,
            out,
        } => {
            let seed = seed.or(file_config.seed).unwrap_or(config::DEFAULT_SEED);
            let mut dataset = LabeledDataset::default();

            if synth {
                let cfg = SynthConfig {
                    seed,
                    classes,
                    clips_per_class: per_class,
                    joints: synth_joints,
                    frames,
                    noise,
                    warps: !no_warps,
                };
                dataset = synth_classes(&cfg)?;
            }

            for path in &clips {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::data(format!("cannot read {path}: {e}")))?;
                dataset.clips.extend(LabeledDataset::from_json(&text)?.clips);
            }

            if let Some(asf_path) = &asf {
                if amc.is_empty() {
                    return Err(CliError::usage("--asf requires at least one --amc"));
                }
                let asf_text = std::fs::read_to_string(asf_path)
                    .map_err(|e| CliError::data(format!("cannot read {asf_path}: {e}")))?;
                let skeleton = parse_asf(&asf_text)?;
                for amc_path in &amc {
                    let amc_text = std::fs::read_to_string(amc_path)
                        .map_err(|e| CliError::data(format!("cannot read {amc_path}: {e}")))?;
                    let id = Path::new(amc_path)
                        .file_stem()
                        .and_then(|s| s.to_str())
                        .unwrap_or(amc_path)
                        .to_string();
                    let clip = parse_amc(&amc_text, &skeleton)?.with_id(&id);
                    let names = selected_joint_names(&clip, &skeleton, joints.as_deref())?;
                    let curve = clip_to_curve(&clip, &skeleton, Some(&names))?;
                    dataset.clips.push(ClipRecord::from_curve(
                        id,
                        label.clone(),
                        names,
                        &curve,
                    )?);
                }
            } else if !amc.is_empty() {
                return Err(CliError::usage("--amc requires --asf"));
            }

            if dataset.clips.is_empty() {
                return Err(CliError::usage(
                    "nothing to ingest: pass --synth, --clips, or --asf/--amc",
                ));
            }

            write_file(&out, &dataset.to_json())?;
            for clip in &dataset.clips {
                println!(
                    "clip {}: {} frames, {} joints, label {}",
                    clip.id,
                    clip.frames.len(),
                    clip.joints.len(),
                    clip.label.as_deref().unwrap_or("-")
                );
            }
            println!("wrote {} clips to {out}", dataset.clips.len());
            Ok(())
        }

        Command::Distmat {
            clips,
            method,
            level,
            grid,
            max_step,
            joints,
            weights,
            format,
            no_parallel,
            out,
        } => {
            let cfg = RunConfig::resolve(
                &file_config,
                method,
                level,
                grid,
                max_step,
                None,
                format,
                no_parallel,
                joints,
                weights,
            )?;
            let method = cfg.distance_method()?;
            let dataset = load_dataset(&clips)?;
            let curves = dataset.curves_with_joints(cfg.joints.as_deref())?;
            if let (Some(w), Some(c)) = (&cfg.weights, curves.first()) {
                if w.len() != c.joint_count() {
                    return Err(CliError::usage(format!(
                        "--weights has {} entries for {} joints",
                        w.len(),
                        c.joint_count()
                    )));
                }
            }
            let ids = dataset.ids();
            let matrix = distance_matrix_weighted(
                &curves,
                &ids,
                &method,
                cfg.parallel,
                cfg.weights.as_deref(),
            )?;

            let body = match cfg.format {
                OutputFormat::Csv => io::write_distance_csv(&matrix),
                OutputFormat::Json => io::write_distance_json(&matrix),
            };
            write_file(&out, &body)?;

            let meta = MatrixMetadata {
                method: matrix.method(),
                n: matrix.n(),
                parallel: cfg.parallel,
                level: matches!(method, DistanceMethod::Signature { .. }).then_some(cfg.level),
                grid: matches!(method, DistanceMethod::SrvtDp { .. }).then_some(cfg.grid),
                max_step: matches!(method, DistanceMethod::SrvtDp { .. })
                    .then_some(cfg.max_step),
                build_seconds: matrix.build_seconds(),
            };
            write_file(
                &sidecar_path(&out),
                &serde_json::to_string_pretty(&meta).expect("metadata serializes"),
            )?;
            println!(
                "{} distances over {} clips in {:.3}s -> {out}",
                matrix.method(),
                matrix.n(),
                matrix.build_seconds()
            );
            Ok(())
        }

        Command::Mds {
            dist,
            dim,
            clips,
            out,
            svg: svg_out,
        } => {
            let matrix = io::read_distance_file(&dist)?;
            let labels = match &clips {
                None => None,
                Some(path) => Some(labels_for_ids(&load_dataset(path)?, matrix.ids())?),
            };
            let embedding = classical_mds(&matrix, dim)
                .map_err(|e| CliError::numerical(e.to_string()))?;
            write_file(
                &out,
                &io::write_coords_csv(&embedding, matrix.ids(), labels.as_deref()),
            )?;
            if let Some(svg_path) = svg_out {
                write_file(&svg_path, &svg::scatter_svg(&embedding, labels.as_deref()))?;
            }
            println!(
                "{}",
                serde_json::json!({
                    "n": matrix.n(),
                    "dim": dim,
                    "negative_eigenvalue_mass": embedding.negative_eigenvalue_mass(),
                })
            );
            Ok(())
        }

        Command::Classify { dist, clips, k } => {
            let matrix = io::read_distance_file(&dist)?;
            let dataset = load_dataset(&clips)?;
            let labels = labels_for_ids(&dataset, matrix.ids())?;
            let accuracy = loo_knn_accuracy(&matrix, &labels, k)?;
            let sil = silhouette(&matrix, &labels)?;
            let mut classes = labels.clone();
            classes.sort();
            classes.dedup();
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "n": matrix.n(),
                    "k": k,
                    "classes": classes,
                    "loo_knn_accuracy": accuracy,
                    "silhouette": sil,
                }))
                .expect("report serializes")
            );
            Ok(())
        }

        Command::Bench {
            clips,
            methods,
            level,
            grid,
            max_step,
            seed,
        } => {
            let cfg = RunConfig::resolve(
                &file_config,
                None,
                level,
                grid,
                max_step,
                seed,
                None,
                true,
                None,
                None,
            )?;
            let dataset = match &clips {
                Some(path) => load_dataset(path)?,
                None => synth_classes(&SynthConfig {
                    seed: cfg.seed,
                    classes: 3,
                    clips_per_class: 4,
                    joints: 5,
                    frames: 40,
                    noise: 0.05,
                    warps: true,
                })?,
            };
            let curves = dataset.curves()?;
            let ids = dataset.ids();

            let mut timings: Vec<(String, f64)> = Vec::new();
            for name in &methods {
                let method = RunConfig {
                    method: name.clone(),
                    ..cfg.clone()
                }
                .distance_method()?;
                // Parallelism stays off so the comparison is algorithmic.
                let matrix = distance_matrix_weighted(&curves, &ids, &method, false, None)?;
                println!("{name}: {:.3}s", matrix.build_seconds());
                timings.push((name.clone(), matrix.build_seconds()));
            }
            let lookup = |m: &str| timings.iter().find(|(n, _)| n == m).map(|(_, s)| *s);
            if let (Some(dp), Some(sig)) = (lookup("srvt_dp"), lookup("signature")) {
                println!("ratio (srvt_dp / signature): {:.1}", dp / sig);
            }
            Ok(())
        }

        Command::Selftest => {
            let results = shapesig::selftest::run_selftests();
            let mut all_ok = true;
            for r in &results {
                println!(
                    "{}: {} ({})",
                    r.name,
                    if r.passed { "PASS" } else { "FAIL" },
                    r.detail
                );
                all_ok &= r.passed;
            }
            if all_ok {
                Ok(())
            } else {
                Err(CliError::numerical("self-test failures"))
            }
        }
    }
}

fn load_dataset(path: &str) -> Result<LabeledDataset, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {path}: {e}")))?;
    Ok(LabeledDataset::from_json(&text)?)
}

/// Labels aligned with a distance matrix's ids, looked up by clip id.
fn labels_for_ids(dataset: &LabeledDataset, ids: &[String]) -> Result<Vec<String>, CliError> {
    ids.iter()
        .map(|id| {
            let clip = dataset
                .clips
                .iter()
                .find(|c| &c.id == id)
                .ok_or_else(|| CliError::data(format!("no clip with id {id:?} in dataset")))?;
            clip.label
                .clone()
                .ok_or_else(|| CliError::data(format!("clip {id:?} has no label")))
        })
        .collect()
}
