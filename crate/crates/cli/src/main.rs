use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};
use pdfcorpus_cli::config::{ConfigError, PipelineConfig, SourceMode};
use pdfcorpus_cli::{Pipeline, PipelineError, RunReport, Stage};
use pdfcorpus_core::lang::LangCode;
use pdfcorpus_core::langid::detect_language;
use pdfcorpus_pdf::extract::extract_tokens_with;

const EXIT_CONFIG: u8 = 1;
const EXIT_PARTIAL: u8 = 2;

/// Builds a language-balanced corpus of PDF documents from crawl indexes.
#[derive(Parser, Debug)]
#[command(name = "pdfcorpus", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// TOML or JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Work directory holding checkpoints, payloads and outputs.
    #[arg(long, global = true, default_value = "work")]
    work: PathBuf,
    /// Discard results computed under different settings.
    #[arg(long, global = true)]
    force: bool,
    #[arg(long, global = true)]
    quiet: bool,
    /// Comma-separated language codes.
    #[arg(long, global = true, value_delimiter = ',')]
    languages: Option<Vec<LangCode>>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    max_per_language: Option<usize>,
    #[arg(long, global = true, value_enum)]
    source: Option<SourceMode>,
    /// Base URL or local directory of the WARC files.
    #[arg(long, global = true)]
    warc_base: Option<String>,
    #[arg(long, global = true)]
    concurrency: Option<usize>,
    /// Per-request timeout in seconds.
    #[arg(long, global = true)]
    timeout: Option<f64>,
    #[arg(long, global = true)]
    retries: Option<u32>,
    /// Seconds between requests to one domain.
    #[arg(long, global = true)]
    per_domain_interval: Option<f64>,
    /// OCR command template with {input}, {lang} and {output}.
    #[arg(long, global = true)]
    ocr_command: Option<String>,
    /// RFC 3339 instant stamped on every record instead of the clock.
    #[arg(long, global = true)]
    fixed_time: Option<DateTime<Utc>>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read CDX files and keep successful PDF captures.
    ExtractLinks { cdx: Vec<PathBuf> },
    /// Assign URL languages and drop spam domains.
    Filter,
    /// Apply the per-domain and per-language caps.
    Balance,
    /// Fetch the selected documents.
    Download,
    /// Parse documents and classify them as born-digital; with files, print
    /// their scan reports instead.
    Scan { files: Vec<PathBuf> },
    /// Extract text or run OCR; with files, print their text instead.
    ExtractText { files: Vec<PathBuf> },
    /// Identify document languages; with text files, print verdicts instead.
    DetectLang { files: Vec<PathBuf> },
    /// Compute corpus statistics over the index.
    Stats,
    /// Run every stage that has not completed yet.
    Run {
        cdx: Vec<PathBuf>,
        #[arg(long, value_enum)]
        stop_after: Option<Stage>,
    },
}

fn build_config(g: &Global) -> Result<PipelineConfig, ConfigError> {
    let mut cfg = match &g.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(l) = &g.languages {
        cfg.languages = l.clone();
    }
    if let Some(s) = g.seed {
        cfg.balance.seed = s;
    }
    if let Some(m) = g.max_per_language {
        cfg.balance.max_per_language = m;
    }
    if let Some(s) = g.source {
        cfg.fetch.source = s;
    }
    if let Some(b) = &g.warc_base {
        cfg.fetch.warc_base = b.clone();
    }
    if let Some(c) = g.concurrency {
        cfg.fetch.concurrency = c;
    }
    if let Some(t) = g.timeout {
        cfg.fetch.http.timeout = std::time::Duration::try_from_secs_f64(t)
            .map_err(|e| ConfigError::Invalid(format!("timeout: {e}")))?;
    }
    if let Some(r) = g.retries {
        cfg.fetch.http.max_retries = r;
    }
    if let Some(i) = g.per_domain_interval {
        cfg.fetch.per_domain_interval = i;
    }
    if let Some(o) = &g.ocr_command {
        cfg.ocr.command = Some(o.clone());
    }
    if let Some(t) = g.fixed_time {
        cfg.fixed_time = Some(t);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_report(report: &RunReport, quiet: bool) {
    let mut out = std::io::stdout().lock();
    let _ = write!(out, "{}", report.funnel.render());
    if !quiet {
        for (s, n) in &report.statuses {
            let _ = writeln!(out, "{:<22} {n}", s.as_str());
        }
    }
    for p in &report.problems {
        let _ = writeln!(out, "conservation: {p}");
    }
}

fn scan_files(files: &[PathBuf]) -> anyhow::Result<()> {
    for f in files {
        let bytes = std::fs::read(f).with_context(|| f.display().to_string())?;
        let report = pdfcorpus_pdf::scan_bytes(&bytes).with_context(|| f.display().to_string())?;
        let line = serde_json::json!({
            "file": f,
            "born_digital": pdfcorpus_pdf::classify_born_digital(&report),
            "report": report,
        });
        println!("{line}");
    }
    Ok(())
}

fn extract_files(files: &[PathBuf], cfg: &PipelineConfig) -> anyhow::Result<()> {
    for f in files {
        let bytes = std::fs::read(f).with_context(|| f.display().to_string())?;
        let doc = pdfcorpus_pdf::parse_document(&bytes).with_context(|| f.display().to_string())?;
        let (pages, warnings) = extract_tokens_with(&doc, &cfg.extract);
        for w in warnings {
            eprintln!("{}: {w}", f.display());
        }
        for p in pages {
            println!("{}", p.text());
        }
    }
    Ok(())
}

fn detect_files(files: &[PathBuf], cfg: &PipelineConfig) -> anyhow::Result<()> {
    let profiles = cfg.profiles()?;
    for f in files {
        let text = std::fs::read_to_string(f).with_context(|| f.display().to_string())?;
        let v = detect_language(&text, &profiles, &cfg.langid);
        println!("{}", serde_json::json!({ "file": f, "verdict": v }));
    }
    Ok(())
}

fn run_stage(cli: &Cli, cfg: PipelineConfig, stage: Option<Stage>, inputs: &[PathBuf], stop: Option<Stage>) -> Result<ExitCode, PipelineError> {
    let max_fail = cfg.max_failure_ratio;
    let mut p = Pipeline::open(cfg, &cli.global.work, cli.global.force)?.quiet(cli.global.quiet);
    let report = match stage {
        Some(s) => p.run_stage(s, inputs)?,
        None => p.run(inputs, stop)?,
    };
    print_report(&report, cli.global.quiet);
    if report.exceeds(max_fail) {
        eprintln!(
            "failure ratio {:.2}% exceeds the configured {:.2}%",
            100.0 * report.failure_ratio,
            100.0 * max_fail
        );
        return Ok(ExitCode::from(EXIT_PARTIAL));
    }
    Ok(ExitCode::SUCCESS)
}

fn file_mode(files: &[PathBuf], f: impl FnOnce(&[PathBuf]) -> anyhow::Result<()>) -> ExitCode {
    match f(files) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_PARTIAL)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = match build_config(&cli.global) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let staged = |stage: Option<Stage>, inputs: &[PathBuf], stop: Option<Stage>| {
        match run_stage(&cli, cfg.clone(), stage, inputs, stop) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_CONFIG)
            }
        }
    };
    let none: &[PathBuf] = &[];
    match &cli.command {
        Command::ExtractLinks { cdx } => staged(Some(Stage::ExtractLinks), cdx, None),
        Command::Filter => staged(Some(Stage::Filter), none, None),
        Command::Balance => staged(Some(Stage::Balance), none, None),
        Command::Download => staged(Some(Stage::Download), none, None),
        Command::Scan { files } if !files.is_empty() => file_mode(files, scan_files),
        Command::Scan { .. } => staged(Some(Stage::Scan), none, None),
        Command::ExtractText { files } if !files.is_empty() => file_mode(files, |f| extract_files(f, &cfg)),
        Command::ExtractText { .. } => staged(Some(Stage::ExtractText), none, None),
        Command::DetectLang { files } if !files.is_empty() => file_mode(files, |f| detect_files(f, &cfg)),
        Command::DetectLang { .. } => staged(Some(Stage::DetectLang), none, None),
        Command::Stats => staged(Some(Stage::Stats), none, None),
        Command::Run { cdx, stop_after } => staged(None, cdx, *stop_after),
    }
}
