//! Command-line front end: `reduce`, `baseline`, `compare`, `render`.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::baseline::{ds_obs, DsObsOptions, EmptyWindow, ModeWeighting};
use crate::error::{Error, Result};
use crate::export::{
    bins_dump, graph_dump, path_dump, reduction_document, render_phrase_roll, write_midi,
};
use crate::graph::CostConfig;
use crate::ingest::{
    import_midi, json_error, parse_leadsheet, AnticipationConfig, MidiImportConfig, RationalRepr,
};
use crate::metrics::{compute_metrics, mean_std, MetricReport};
use crate::model::{Phrase, ReducedMelody};
use crate::postprocess::{
    prepare, realize_path, FrontLoadedTemplate, OmissionPolicy, ReduceOptions,
};
use crate::solver::{k_shortest_paths, ReductionPath};

pub const CONFIG_ENV: &str = "MELREDUCE_CONFIG";

#[derive(Debug, Parser)]
#[command(
    name = "melreduce",
    version,
    about = "Reduce melodies to their structural skeleton"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reduce every phrase with the least-cost path method.
    Reduce(RunArgs),
    /// Reduce every phrase with the half-note downsampling baseline.
    Baseline(RunArgs),
    /// Tabulate proxy metrics for both methods.
    Compare(RunArgs),
    /// Print piano rolls of each phrase and its reduction.
    Render(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    Json,
    /// MIDI melody plus a chord CSV.
    Midi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Midi,
    Ascii,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Input files or directories.
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub kind: InputKind,
    /// Chord CSV for MIDI input; defaults to the MIDI path with a `.csv` extension.
    #[arg(long)]
    pub chords: Option<PathBuf>,
    /// MIDI track holding the melody.
    #[arg(long)]
    pub track: Option<usize>,
    /// JSON config file (cost model fields plus run settings).
    #[arg(long, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of ranked alternatives per phrase.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long = "D-measures")]
    pub d_measures: Option<u32>,
    /// Output file, or directory when several inputs are given.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Include graph, path and bin dumps.
    #[arg(long)]
    pub debug_dumps: bool,
    /// Files processed at once.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Omit overflow notes uniformly instead of keeping bin endpoints.
    #[arg(long)]
    pub uniform_omission: bool,
    /// Baseline counts notes per window instead of weighting by duration.
    #[arg(long)]
    pub onset_count: bool,
    /// Baseline leaves empty windows silent instead of holding the previous pitch.
    #[arg(long)]
    pub rests: bool,
}

/// Settings read from a config file. Cost fields sit at the top level.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default)]
pub struct FileConfig {
    #[serde(flatten)]
    pub cost: CostConfig,
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub anticipation_window: Option<RationalRepr>,
    pub protect_endpoints: Option<bool>,
    pub workers: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_slice(&bytes).map_err(|e| json_error(&bytes, e))
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub kind: InputKind,
    pub chords: Option<PathBuf>,
    pub track: Option<usize>,
    pub options: ReduceOptions,
    pub k: usize,
    /// `None` means JSON, or the text table for `compare`.
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
    pub debug_dumps: bool,
    pub workers: Option<usize>,
    pub baseline: DsObsOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: vec![],
            kind: InputKind::Json,
            chords: None,
            track: None,
            options: ReduceOptions::default(),
            k: 1,
            format: None,
            out: None,
            debug_dumps: false,
            workers: None,
            baseline: DsObsOptions::default(),
        }
    }
}

impl RunConfig {
    pub fn output_format(&self) -> OutputFormat {
        self.format.unwrap_or(OutputFormat::Json)
    }

    /// Defaults, then the config file, then flags.
    pub fn resolve(args: &RunArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let mut cost = file.cost;
        if let Some(eta) = args.eta {
            cost.eta = eta;
        }
        if let Some(d) = args.d_measures {
            cost.d_measures = d;
        }
        cost.validate()?;
        let anticipation = match file.anticipation_window {
            Some(w) => AnticipationConfig::new(
                w.to_beats()
                    .ok_or_else(|| Error::Config("anticipation_window is not a number".into()))?,
            )?,
            None => AnticipationConfig::default(),
        };
        let omission = OmissionPolicy {
            rng_seed: args.seed.or(file.seed).unwrap_or(0),
            protect_endpoints: !args.uniform_omission && file.protect_endpoints.unwrap_or(true),
        };
        let k = args.k.or(file.k).unwrap_or(1);
        if k == 0 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        Ok(RunConfig {
            inputs: args.input.clone(),
            kind: args.kind,
            chords: args.chords.clone(),
            track: args.track,
            options: ReduceOptions {
                cost,
                anticipation,
                omission,
                piece_pitch_range: None,
            },
            k,
            format: args.format,
            out: args.out.clone(),
            debug_dumps: args.debug_dumps,
            workers: args.workers.or(file.workers),
            baseline: DsObsOptions {
                weighting: if args.onset_count {
                    ModeWeighting::OnsetCount
                } else {
                    ModeWeighting::Duration
                },
                empty: if args.rests {
                    EmptyWindow::Rest
                } else {
                    EmptyWindow::Sustain
                },
            },
        })
    }
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    Partial = 1,
    Unusable = 2,
}

impl From<Status> for std::process::ExitCode {
    fn from(s: Status) -> Self {
        std::process::ExitCode::from(s as u8)
    }
}

/// Expand directories (sorted, matching the input kind's extensions).
pub fn collect_inputs(inputs: &[PathBuf], kind: InputKind) -> Result<Vec<PathBuf>> {
    let exts: &[&str] = match kind {
        InputKind::Json => &["json"],
        InputKind::Midi => &["mid", "midi"],
    };
    let mut files = Vec::new();
    for path in inputs {
        if path.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(path)
                .map_err(|e| Error::io(path, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    p.extension()
                        .and_then(|e| e.to_str())
                        .is_some_and(|e| exts.contains(&e.to_ascii_lowercase().as_str()))
                })
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(path.clone());
        }
    }
    if files.is_empty() {
        return Err(Error::Config("no input files".into()));
    }
    Ok(files)
}

pub fn load_phrases(path: &Path, cfg: &RunConfig) -> Result<Vec<Phrase>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match cfg.kind {
        InputKind::Json => parse_leadsheet(&bytes),
        InputKind::Midi => {
            let sidecar_path = cfg
                .chords
                .clone()
                .unwrap_or_else(|| path.with_extension("csv"));
            let sidecar = fs::read(&sidecar_path).map_err(|e| Error::io(&sidecar_path, e))?;
            let import = MidiImportConfig {
                track: cfg.track,
                ..Default::default()
            };
            import_midi(&bytes, &sidecar, &import)
        }
    }
}

/// One ranked reduction of a phrase.
#[derive(Debug, Clone)]
pub struct RankedReduction {
    pub rank: usize,
    pub path: ReductionPath,
    pub melody: ReducedMelody,
    pub overflowed: bool,
    pub debug: Option<Value>,
}

#[derive(Debug)]
pub struct PhraseOutcome {
    pub index: usize,
    pub phrase: Phrase,
    pub result: Result<Vec<RankedReduction>>,
}

#[derive(Debug)]
pub struct FileOutcome {
    pub path: PathBuf,
    pub result: Result<Vec<PhraseOutcome>>,
}

impl FileOutcome {
    pub fn failed_phrases(&self) -> usize {
        match &self.result {
            Ok(ps) => ps.iter().filter(|p| p.result.is_err()).count(),
            Err(_) => 1,
        }
    }
}

fn phrase_ref(path: &Path, index: usize) -> String {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy())
        .unwrap_or_default();
    format!("{name}#{index}")
}

/// The `k` best reductions of one phrase.
pub fn reduce_ranked(p: &Phrase, cfg: &RunConfig, name: &str) -> Result<Vec<RankedReduction>> {
    let (membership, graph) = prepare(p, &cfg.options)?;
    let paths = k_shortest_paths(&graph, cfg.k);
    paths
        .into_iter()
        .enumerate()
        .map(|(r, path)| {
            let (bins, mut melody, overflowed) = realize_path(
                p,
                &membership,
                &path,
                &cfg.options.omission,
                &FrontLoadedTemplate,
            )?;
            melody.phrase_ref = name.to_string();
            let debug = cfg.debug_dumps.then(|| {
                json!({
                    "graph": graph_dump(&graph),
                    "path": path_dump(&graph, &path),
                    "bins": bins_dump(&bins),
                    "anticipations": membership.anticipation_flags(),
                })
            });
            Ok(RankedReduction {
                rank: r + 1,
                path,
                melody,
                overflowed,
                debug,
            })
        })
        .collect()
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    match builder.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Pitch extremes across all phrases of one file.
fn with_piece_range(cfg: &RunConfig, phrases: &[Phrase]) -> RunConfig {
    let lo = phrases
        .iter()
        .filter_map(|p| p.pitch_range())
        .map(|r| r.0)
        .min();
    let hi = phrases
        .iter()
        .filter_map(|p| p.pitch_range())
        .map(|r| r.1)
        .max();
    let mut out = cfg.clone();
    out.options.piece_pitch_range = lo.zip(hi);
    out
}

/// Run `per_phrase` over every phrase of every input file, files in parallel.
fn process<F>(cfg: &RunConfig, files: &[PathBuf], per_phrase: F) -> Vec<FileOutcome>
where
    F: Fn(&Phrase, &str, &RunConfig) -> Result<Vec<RankedReduction>> + Sync,
{
    with_pool(cfg.workers, || {
        files
            .par_iter()
            .map(|path| FileOutcome {
                path: path.clone(),
                result: load_phrases(path, cfg).map(|phrases| {
                    let file_cfg = with_piece_range(cfg, &phrases);
                    phrases
                        .into_iter()
                        .enumerate()
                        .map(|(index, phrase)| {
                            let result = per_phrase(&phrase, &phrase_ref(path, index), &file_cfg);
                            PhraseOutcome {
                                index,
                                phrase,
                                result,
                            }
                        })
                        .collect()
                }),
            })
            .collect()
    })
}

pub fn run_reduce(cfg: &RunConfig, files: &[PathBuf]) -> Vec<FileOutcome> {
    process(cfg, files, |p, name, cfg| reduce_ranked(p, cfg, name))
}

pub fn run_baseline(cfg: &RunConfig, files: &[PathBuf]) -> Vec<FileOutcome> {
    process(cfg, files, |p, name, cfg| {
        crate::model::ensure_valid(p)?;
        let mut melody = ds_obs(p, &cfg.baseline);
        melody.phrase_ref = name.to_string();
        Ok(vec![RankedReduction {
            rank: 1,
            path: ReductionPath {
                nodes: vec![],
                total_cost: 0.0,
                categories: vec![],
            },
            melody,
            overflowed: false,
            debug: None,
        }])
    })
}

fn file_json(outcome: &FileOutcome, with_path: bool) -> Value {
    let source = outcome
        .path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned());
    match &outcome.result {
        Err(e) => json!({ "source": source, "error": e.to_string() }),
        Ok(phrases) => json!({
            "source": source,
            "phrases": phrases.iter().map(|p| match &p.result {
                Err(e) => json!({ "index": p.index, "error": e.to_string() }),
                Ok(ranked) => json!({
                    "index": p.index,
                    "reductions": ranked.iter().map(|r| {
                        let mut v = json!({ "rank": r.rank });
                        if with_path {
                            v["path"] = json!(r.path.nodes);
                            v["path_cost"] = json!(r.path.total_cost);
                            v["overflowed"] = json!(r.overflowed);
                        }
                        v["melody"] = serde_json::to_value(reduction_document(&p.phrase, &r.melody))
                            .expect("document serializes");
                        if let Some(d) = &r.debug {
                            v["debug"] = d.clone();
                        }
                        v
                    }).collect::<Vec<_>>(),
                }),
            }).collect::<Vec<_>>(),
        }),
    }
}

fn file_ascii(outcome: &FileOutcome) -> String {
    let mut s = String::new();
    let Ok(phrases) = &outcome.result else {
        return s;
    };
    for p in phrases {
        let Ok(ranked) = &p.result else { continue };
        for r in ranked {
            let _ = writeln!(s, "# {} rank {}", r.melody.phrase_ref, r.rank);
            s.push_str(&render_phrase_roll(&p.phrase, &r.melody));
        }
    }
    s
}

fn file_midi(outcome: &FileOutcome) -> Option<Vec<u8>> {
    let phrases = outcome.result.as_ref().ok()?;
    let ok: Vec<(&Phrase, &ReducedMelody)> = phrases
        .iter()
        .filter_map(|p| {
            let ranked = p.result.as_ref().ok()?;
            Some((&p.phrase, &ranked.first()?.melody))
        })
        .collect();
    if ok.is_empty() {
        return None;
    }
    let originals: Vec<Phrase> = ok.iter().map(|(p, _)| (*p).clone()).collect();
    let melodies: Vec<ReducedMelody> = ok.iter().map(|(_, m)| (*m).clone()).collect();
    Some(write_midi(&originals, &melodies))
}

fn extension(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Json => "json",
        OutputFormat::Midi => "mid",
        OutputFormat::Ascii => "txt",
    }
}

/// Destination for one input's artifact; `None` means standard output.
fn destination(cfg: &RunConfig, input: &Path, suffix: &str, many: bool) -> Option<PathBuf> {
    let out = cfg.out.as_ref()?;
    if many || out.is_dir() {
        let stem = input
            .file_stem()
            .map(|s| s.to_string_lossy())
            .unwrap_or_default();
        Some(out.join(format!(
            "{stem}.{suffix}.{}",
            extension(cfg.output_format())
        )))
    } else {
        Some(out.clone())
    }
}

fn emit(dest: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match dest {
        Some(path) => fs::write(path, bytes).map_err(|e| Error::io(path, e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn report_errors(outcomes: &[FileOutcome]) {
    for o in outcomes {
        match &o.result {
            Err(e) => eprintln!("{}: {e}", o.path.display()),
            Ok(phrases) => {
                for p in phrases {
                    if let Err(e) = &p.result {
                        eprintln!("{}: phrase {}: {e}", o.path.display(), p.index);
                    }
                }
            }
        }
    }
}

fn status_of(outcomes: &[FileOutcome]) -> Status {
    let unusable = outcomes.iter().filter(|o| o.result.is_err()).count();
    let failed: usize = outcomes.iter().map(FileOutcome::failed_phrases).sum();
    if unusable == outcomes.len() {
        Status::Unusable
    } else if failed > 0 {
        Status::Partial
    } else {
        Status::Success
    }
}

fn write_outputs(
    cfg: &RunConfig,
    outcomes: &[FileOutcome],
    suffix: &str,
    with_path: bool,
) -> Result<()> {
    let many = outcomes.len() > 1;
    if cfg.output_format() == OutputFormat::Midi && cfg.out.is_none() {
        return Err(Error::Config("MIDI output needs --out".into()));
    }
    if many {
        if let Some(dir) = &cfg.out {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    let mut stdout_json = Vec::new();
    for o in outcomes {
        let dest = destination(cfg, &o.path, suffix, many);
        match cfg.output_format() {
            OutputFormat::Json => {
                let v = file_json(o, with_path);
                if dest.is_some() {
                    let text = serde_json::to_string_pretty(&v).expect("json") + "\n";
                    emit(dest.as_deref(), text.as_bytes())?;
                } else {
                    stdout_json.push(v);
                }
            }
            OutputFormat::Ascii => emit(dest.as_deref(), file_ascii(o).as_bytes())?,
            OutputFormat::Midi => {
                if let Some(bytes) = file_midi(o) {
                    emit(dest.as_deref(), &bytes)?;
                }
            }
        }
    }
    if !stdout_json.is_empty() {
        let v = if many {
            Value::Array(stdout_json)
        } else {
            stdout_json.remove(0)
        };
        emit(
            None,
            (serde_json::to_string_pretty(&v).expect("json") + "\n").as_bytes(),
        )?;
    }
    Ok(())
}

fn finish(cfg: &RunConfig, outcomes: &[FileOutcome], suffix: &str, with_path: bool) -> Status {
    report_errors(outcomes);
    let status = status_of(outcomes);
    if status == Status::Unusable {
        return status;
    }
    match write_outputs(cfg, outcomes, suffix, with_path) {
        Ok(()) => status,
        Err(e) => {
            eprintln!("{e}");
            Status::Unusable
        }
    }
}

fn inputs_or_fail(cfg: &RunConfig) -> std::result::Result<Vec<PathBuf>, Status> {
    collect_inputs(&cfg.inputs, cfg.kind).map_err(|e| {
        eprintln!("{e}");
        Status::Unusable
    })
}

pub fn cmd_reduce(cfg: &RunConfig) -> Status {
    match inputs_or_fail(cfg) {
        Ok(files) => finish(cfg, &run_reduce(cfg, &files), "reduced", true),
        Err(s) => s,
    }
}

pub fn cmd_baseline(cfg: &RunConfig) -> Status {
    match inputs_or_fail(cfg) {
        Ok(files) => finish(cfg, &run_baseline(cfg, &files), "dsobs", false),
        Err(s) => s,
    }
}

/// One row of the comparison table.
#[derive(Debug, Clone)]
pub struct CompareRow {
    pub source: String,
    pub phrase: Option<usize>,
    pub method: &'static str,
    pub result: std::result::Result<MetricReport, String>,
}

pub const PROPOSED: &str = "proposed";
pub const DS_OBS: &str = "ds-obs";

pub fn compare_rows(cfg: &RunConfig, files: &[PathBuf]) -> Vec<CompareRow> {
    let single = RunConfig {
        k: 1,
        debug_dumps: false,
        ..cfg.clone()
    };
    let reduced = run_reduce(&single, files);
    let mut rows = Vec::new();
    for o in &reduced {
        let source = o
            .path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let phrases = match &o.result {
            Ok(p) => p,
            Err(e) => {
                rows.push(CompareRow {
                    source,
                    phrase: None,
                    method: PROPOSED,
                    result: Err(e.to_string()),
                });
                continue;
            }
        };
        for p in phrases {
            let proposed = match &p.result {
                Ok(r) => compute_metrics(&p.phrase, &r[0].melody).map_err(|e| e.to_string()),
                Err(e) => Err(e.to_string()),
            };
            let baseline = crate::model::ensure_valid(&p.phrase)
                .and_then(|_| compute_metrics(&p.phrase, &ds_obs(&p.phrase, &cfg.baseline)))
                .map_err(|e| e.to_string());
            for (method, result) in [(PROPOSED, proposed), (DS_OBS, baseline)] {
                rows.push(CompareRow {
                    source: source.clone(),
                    phrase: Some(p.index),
                    method,
                    result,
                });
            }
        }
    }
    rows
}

fn fmt_metric(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

/// Aligned text table with a mean ± std summary per method.
pub fn render_table(rows: &[CompareRow]) -> String {
    let mut table: Vec<Vec<String>> = vec![["source", "phrase", "method"]
        .iter()
        .chain(MetricReport::COLUMNS.iter())
        .map(|s| s.to_string())
        .collect()];
    for r in rows {
        let mut line = vec![
            r.source.clone(),
            r.phrase.map_or_else(|| "-".into(), |i| i.to_string()),
            r.method.to_string(),
        ];
        match &r.result {
            Ok(m) => line.extend(m.values().iter().map(|v| fmt_metric(*v))),
            Err(e) => line.push(format!("error: {e}")),
        }
        table.push(line);
    }
    for method in [PROPOSED, DS_OBS] {
        let reports: Vec<&MetricReport> = rows
            .iter()
            .filter(|r| r.method == method)
            .filter_map(|r| r.result.as_ref().ok())
            .collect();
        let mut line = vec![
            "mean ± std".to_string(),
            reports.len().to_string(),
            method.to_string(),
        ];
        for c in 0..MetricReport::COLUMNS.len() {
            line.push(match mean_std(reports.iter().map(|m| m.values()[c])) {
                Some((mean, std, _)) => format!("{mean:.4} ± {std:.4}"),
                None => "-".into(),
            });
        }
        table.push(line);
    }
    let cols = table.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            table
                .iter()
                .filter(|row| row.len() > 1 && c + 1 < row.len())
                .filter_map(|row| row.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::from("# metrics are heuristic proxies, not validated quality scores\n");
    for row in &table {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| {
                if c + 1 == row.len() {
                    s.clone()
                } else {
                    format!("{s:<w$}", w = widths[c])
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn rows_json(rows: &[CompareRow]) -> Value {
    json!({
        "note": "metrics are heuristic proxies, not validated quality scores",
        "rows": rows.iter().map(|r| {
            let mut v = json!({ "source": r.source, "phrase": r.phrase, "method": r.method });
            match &r.result {
                Ok(m) => v["metrics"] = json!(m),
                Err(e) => v["error"] = json!(e),
            }
            v
        }).collect::<Vec<_>>(),
    })
}

pub fn cmd_compare(cfg: &RunConfig) -> Status {
    let files = match inputs_or_fail(cfg) {
        Ok(f) => f,
        Err(s) => return s,
    };
    let rows = compare_rows(cfg, &files);
    for r in &rows {
        if let Err(e) = &r.result {
            match r.phrase {
                Some(i) => eprintln!("{} phrase {i} ({}): {e}", r.source, r.method),
                None => eprintln!("{}: {e}", r.source),
            }
        }
    }
    let failed = rows.iter().filter(|r| r.result.is_err()).count();
    if failed == rows.len() && rows.iter().all(|r| r.phrase.is_none()) {
        return Status::Unusable;
    }
    let text = match cfg.format {
        Some(OutputFormat::Json) => {
            serde_json::to_string_pretty(&rows_json(&rows)).expect("json") + "\n"
        }
        _ => render_table(&rows),
    };
    if let Err(e) = emit(cfg.out.as_deref(), text.as_bytes()) {
        eprintln!("{e}");
        return Status::Unusable;
    }
    if failed > 0 {
        Status::Partial
    } else {
        Status::Success
    }
}

pub fn cmd_render(cfg: &RunConfig) -> Status {
    let files = match inputs_or_fail(cfg) {
        Ok(f) => f,
        Err(s) => return s,
    };
    let outcomes = run_reduce(
        &RunConfig {
            k: 1,
            ..cfg.clone()
        },
        &files,
    );
    report_errors(&outcomes);
    let status = status_of(&outcomes);
    if status == Status::Unusable {
        return status;
    }
    let mut text = String::new();
    for o in &outcomes {
        let Ok(phrases) = &o.result else { continue };
        for p in phrases {
            let name = phrase_ref(&o.path, p.index);
            let _ = writeln!(text, "# {name} original");
            text.push_str(&render_phrase_roll(
                &p.phrase,
                &ReducedMelody::identity(&p.phrase, ""),
            ));
            if let Ok(r) = &p.result {
                let _ = writeln!(text, "# {name} reduction");
                text.push_str(&render_phrase_roll(&p.phrase, &r[0].melody));
            }
        }
    }
    match emit(cfg.out.as_deref(), text.as_bytes()) {
        Ok(()) => status,
        Err(e) => {
            eprintln!("{e}");
            Status::Unusable
        }
    }
}

pub fn run(cli: Cli) -> Status {
    let (Command::Reduce(args)
    | Command::Baseline(args)
    | Command::Compare(args)
    | Command::Render(args)) = &cli.command;
    let cfg = match RunConfig::resolve(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return Status::Unusable;
        }
    };
    match cli.command {
        Command::Reduce(_) => cmd_reduce(&cfg),
        Command::Baseline(_) => cmd_baseline(&cfg),
        Command::Compare(_) => cmd_compare(&cfg),
        Command::Render(_) => cmd_render(&cfg),
    }
}
