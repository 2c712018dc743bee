//! `crowncount` subcommands. Exit codes: 0 success, 1 usage error, 2 data error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use crowncount_core::bench::{
    count_from_probability, format_signed, signed_error_metrics, CountParams,
};
use crowncount_core::classifiers::{fit, ClassifierKind};
use crowncount_core::domainfilter::apply_constraints;
use crowncount_core::features::build_stack;
use crowncount_core::overlay::render_overlay;
use crowncount_core::segmentation::{binarize, classify_image, extract_training};
use crowncount_core::synth::generate;

use crate::config::PipelineConfig;
use crate::model::{load_model, save_model, ModelFile};
use crate::runner::{run_bench, BenchConfig};
use crate::{io, tables, Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "crowncount",
    version,
    about = "Count tree crowns in aerial imagery by supervised segmentation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic plantation image, annotation and ground truth
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        failure_prob: Option<f64>,
        #[arg(long)]
        clutter: Option<usize>,
    },
    /// Fit a pixel classifier on the annotated image and save it
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        inputs: Inputs,
        /// Classifier key, e.g. random_forest
        #[arg(long)]
        classifier: Option<String>,
    },
    /// Write the probability map and binary mask
    Segment {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        threshold: Option<f64>,
        /// Also export every feature plane as PNG
        #[arg(long)]
        dump_features: bool,
    },
    /// Segment, split and count crowns; writes detection CSVs and an overlay
    Count {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        counting: Counting,
    },
    /// Compare classifiers on one annotated image
    Bench {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        counting: Counting,
        /// Run classifiers concurrently (no timing columns)
        #[arg(long)]
        parallel: bool,
        /// Restrict to these classifier keys (comma separated)
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
    /// Apply the domain constraints to an existing detections CSV
    Filter {
        #[command(flatten)]
        common: Common,
        /// Detections CSV
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// JSON pipeline configuration
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Inputs {
    #[arg(long)]
    image: Option<PathBuf>,
    #[arg(long)]
    annotation: Option<PathBuf>,
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Counting {
    #[arg(long)]
    threshold: Option<f64>,
    /// Minimum equivalent radius in pixels
    #[arg(long)]
    min_radius: Option<f64>,
    /// Skip the domain constraint filter
    #[arg(long)]
    no_filter: bool,
}

impl Common {
    fn load(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(d) = &self.out_dir {
            cfg.paths.out_dir = d.clone();
        }
        Ok(cfg)
    }
}

impl Inputs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        let set = |slot: &mut Option<PathBuf>, v: &Option<PathBuf>| {
            if v.is_some() {
                slot.clone_from(v);
            }
        };
        set(&mut cfg.paths.image, &self.image);
        set(&mut cfg.paths.annotation, &self.annotation);
        set(&mut cfg.paths.truth, &self.truth);
        set(&mut cfg.paths.model, &self.model);
    }
}

impl Counting {
    fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(t) = self.threshold {
            cfg.binarize_threshold = t;
        }
        if let Some(r) = self.min_radius {
            cfg.min_radius = r;
        }
        if self.no_filter {
            cfg.constraints = None;
        }
    }
}

fn count_params(cfg: &PipelineConfig) -> CountParams {
    CountParams {
        threshold: cfg.binarize_threshold,
        min_radius: cfg.min_radius,
        constraints: cfg.constraints.clone(),
    }
}

/// Resolves, validates and echoes the configuration to `effective-config.json`.
fn finish(cfg: PipelineConfig) -> Result<PipelineConfig> {
    let cfg = cfg.resolve()?;
    let dir = &cfg.paths.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("effective-config.json");
    std::fs::write(&path, cfg.to_json() + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(cfg)
}

fn report_error(label: &str, count: usize, truth: Option<usize>) -> String {
    match truth.and_then(|t| signed_error_metrics(count as i64, t as i64).ok()) {
        Some((e, pct)) => format!("{label}: {count} (error {}, {pct:.1}%)", format_signed(e)),
        None => format!("{label}: {count}"),
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth {
            common,
            rows,
            cols,
            noise,
            failure_prob,
            clutter,
        } => {
            let mut cfg = common.load()?;
            let s = &mut cfg.synth;
            s.rows = rows.unwrap_or(s.rows);
            s.cols = cols.unwrap_or(s.cols);
            s.noise_sigma = noise.unwrap_or(s.noise_sigma);
            s.failure_prob = failure_prob.unwrap_or(s.failure_prob);
            s.clutter_count = clutter.unwrap_or(s.clutter_count);
            let cfg = finish(cfg)?;
            let (image, truth, annotation) = generate(&cfg.synth)?;
            io::save_image(cfg.paths.image(), &image)?;
            io::save_annotation(cfg.paths.annotation(), &annotation)?;
            tables::write_truth(cfg.paths.truth(), &truth)?;
            println!("trees: {}", truth.count);
            println!("image: {}", cfg.paths.image().display());
        }
        Command::Train {
            common,
            inputs,
            classifier,
        } => {
            let mut cfg = common.load()?;
            inputs.apply(&mut cfg);
            if let Some(key) = classifier {
                cfg.classifier.kind = ClassifierKind::from_key(&key)
                    .ok_or_else(|| Error::Config(format!("unknown classifier `{key}`")))?;
            }
            let cfg = finish(cfg)?;
            let image = io::load_image(cfg.paths.image())?;
            let annotation = io::load_annotation(cfg.paths.annotation())?;
            let stack = build_stack(&image, &cfg.features)?;
            let data =
                extract_training(&stack, &annotation, cfg.max_per_class, cfg.training_seed())?;
            let model = fit(&cfg.classifier, &data)?;
            save_model(
                cfg.paths.model(),
                &ModelFile::new(cfg.features.clone(), model),
            )?;
            let [n0, n1] = data.class_counts();
            println!(
                "trained {} on {} tree / {} non-tree pixels",
                cfg.classifier.label(),
                n1,
                n0
            );
            println!("model: {}", cfg.paths.model().display());
        }
        Command::Segment {
            common,
            inputs,
            threshold,
            dump_features,
        } => {
            let mut cfg = common.load()?;
            inputs.apply(&mut cfg);
            if let Some(t) = threshold {
                cfg.binarize_threshold = t;
            }
            let cfg = finish(cfg)?;
            let model = load_model(cfg.paths.model())?;
            let image = io::load_image(cfg.paths.image())?;
            let stack = build_stack(&image, &model.features)?;
            let map = classify_image(&model.model, &stack)?;
            let dir = &cfg.paths.out_dir;
            io::save_probability(&dir.join("probability.png"), &map)?;
            io::save_mask(
                &dir.join("mask.png"),
                &binarize(&map, cfg.binarize_threshold)?,
            )?;
            if dump_features {
                io::save_feature_planes(&dir.join("features"), &stack)?;
            }
            println!("segmented {}x{}", map.width(), map.height());
        }
        Command::Count {
            common,
            inputs,
            counting,
        } => {
            let mut cfg = common.load()?;
            inputs.apply(&mut cfg);
            counting.apply(&mut cfg);
            let cfg = finish(cfg)?;
            let model = load_model(cfg.paths.model())?;
            let image = io::load_image(cfg.paths.image())?;
            let stack = build_stack(&image, &model.features)?;
            let map = classify_image(&model.model, &stack)?;
            let outcome = count_from_probability(&map, &count_params(&cfg))?;
            let dir = &cfg.paths.out_dir;
            let truth = optional_truth(cfg.paths.truth())?;
            tables::write_detections(&dir.join("detections.csv"), &outcome.detections)?;
            io::save_mask(&dir.join("mask.png"), &outcome.mask)?;
            io::save_labels(&dir.join("labels.png"), &outcome.labels)?;
            println!("{}", report_error("count", outcome.raw_count(), truth));
            let shown = match &outcome.filter {
                Some(report) => {
                    tables::write_detections(&dir.join("detections_filtered.csv"), &report.kept)?;
                    tables::write_removals(&dir.join("removed.csv"), &report.removed)?;
                    println!("{}", report_error("filtered", report.kept.len(), truth));
                    &report.kept
                }
                None => &outcome.detections,
            };
            io::save_image(&dir.join("overlay.png"), &render_overlay(&image, shown))?;
        }
        Command::Bench {
            common,
            inputs,
            counting,
            parallel,
            only,
        } => {
            let mut cfg = common.load()?;
            inputs.apply(&mut cfg);
            counting.apply(&mut cfg);
            cfg.bench.parallel |= parallel;
            let cfg = finish(cfg)?;
            let mut specs = cfg.bench.classifiers.clone();
            if !only.is_empty() {
                for key in &only {
                    if ClassifierKind::from_key(key).is_none() {
                        return Err(Error::Config(format!("unknown classifier `{key}`")));
                    }
                }
                specs.retain(|s| only.iter().any(|k| k == s.kind.key()));
            }
            let image = io::load_image(cfg.paths.image())?;
            let annotation = io::load_annotation(cfg.paths.annotation())?;
            let truth = tables::read_truth(cfg.paths.truth())?;
            let bench_cfg = BenchConfig {
                features: cfg.features.clone(),
                max_per_class: cfg.max_per_class,
                training_seed: cfg.training_seed(),
                count: count_params(&cfg),
                parallel: cfg.bench.parallel,
            };
            let report = run_bench(&image, &annotation, &truth, &specs, &bench_cfg)?;
            let dir = &cfg.paths.out_dir;
            tables::write_report_csv(&dir.join("report.csv"), &report)?;
            let table = tables::format_report_table(&report);
            let path = dir.join("report.txt");
            std::fs::write(&path, &table).map_err(|e| Error::io(&path, e))?;
            print!("{table}");
        }
        Command::Filter { common, input } => {
            let mut cfg = common.load()?;
            if input.is_some() {
                cfg.paths.detections = input;
            }
            let cfg = finish(cfg)?;
            let constraints = cfg
                .constraints
                .clone()
                .ok_or_else(|| Error::Config("`constraints` is null; nothing to apply".into()))?;
            let detections = tables::read_detections(cfg.paths.detections())?;
            let report = apply_constraints(&detections, &constraints)?;
            let dir = &cfg.paths.out_dir;
            tables::write_detections(&dir.join("filtered.csv"), &report.kept)?;
            tables::write_removals(&dir.join("removed.csv"), &report.removed)?;
            println!(
                "kept {} removed {}",
                report.kept.len(),
                report.removed_count
            );
        }
    }
    Ok(())
}

fn optional_truth(path: &Path) -> Result<Option<usize>> {
    if path.exists() {
        Ok(Some(tables::read_truth(path)?.count))
    } else {
        Ok(None)
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}
