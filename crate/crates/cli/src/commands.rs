use std::io::Read;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};
use structsum_core::bridge::{Classifier, SentenceBanks};
use structsum_core::corpus::{parse_corpus, read_corpus, records_to_string, silver_label, write_corpus};
use structsum_core::decoder::{
    decode_sentbs, decode_unconstrained, forced_length_decode, ControlMode, DecodeConfig, LikelihoodMode,
};
use structsum_core::params::GenerationParams;
use structsum_core::pipeline::{
    end_to_end, evaluate_records, EndToEndOptions, EvaluateOptions, LabelField, PipelineError, PredictionRow,
    RunReport, SystemKind,
};
use structsum_core::prompt::{build_prompt, parse_prompt, PromptConfig};
use structsum_core::record::CorpusRecord;
use structsum_core::report::EvalReport;
use structsum_core::stats::compare_reports;
use structsum_core::structure::{pattern_distribution_with, NormalizeOrder};
use structsum_core::synthetic::{self, BUNDLED_CORPUS};
use structsum_core::{parse_label_sequence, LabelSequence};

use crate::output::{self, emit};
use crate::*;

pub fn dispatch(cli: &Cli) -> Result<ExitCode> {
    let g = &cli.global;
    match &cli.command {
        Command::Evaluate(args) => evaluate(args, g),
        Command::Analyze(args) => analyze(args, g),
        Command::Prompt(cmd) => prompt(cmd),
        Command::Decode(args) => decode(args, g),
        Command::Label(args) => label(args, g),
        Command::Compare(args) => return compare(args, g),
        Command::Run(args) => run(args, g),
        Command::Synth(args) => synth(args, g),
    }?;
    Ok(ExitCode::SUCCESS)
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text)?;
        return Ok(text);
    }
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_records(path: &Path) -> Result<Vec<CorpusRecord>> {
    Ok(read_corpus(path).with_context(|| format!("reading corpus {}", path.display()))?.records)
}

fn read_predictions(path: &Path) -> Result<Vec<PredictionRow>> {
    read_input(path)?
        .lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).with_context(|| format!("{}: line {}", path.display(), i + 1))
        })
        .collect()
}

/// Structure arguments accept `|` with or without surrounding spaces.
fn parse_structure(text: &str) -> Result<LabelSequence> {
    Ok(parse_label_sequence(text, "|")?)
}

fn prompt_config(style: &PromptStyle) -> Result<PromptConfig> {
    let cfg = PromptConfig {
        label_separator: style.sep.clone(),
        marker: style.marker.clone(),
        pad_marker: !style.no_pad_marker,
        ..PromptConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn decode_config(opts: &DecoderOpts, g: &GlobalOpts) -> Result<DecodeConfig> {
    let cfg = DecodeConfig {
        mode: match opts.mode {
            ModeChoice::Sentence => ControlMode::SentenceCtrl,
            ModeChoice::Segment => ControlMode::SegmentCtrl,
        },
        lambda: opts.lambda,
        gen: GenerationParams {
            num_candidates: opts.num_candidates,
            max_tokens: opts.max_tokens,
            seed: g.seed,
            ..GenerationParams::default()
        },
        max_sentences_per_segment: opts.max_per_segment,
        stop_on_generator_eos: !opts.no_eos_stop,
        likelihood: match opts.likelihood {
            LikelihoodChoice::Mean => LikelihoodMode::Mean,
            LikelihoodChoice::Sum => LikelihoodMode::Sum,
        },
        record_timing: !g.no_timing,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn note(g: &GlobalOpts, message: impl std::fmt::Display) {
    if !g.quiet {
        eprintln!("{message}");
    }
}

fn eval_text(report: &EvalReport, format: Format) -> Result<String> {
    match format {
        Format::Json => output::json(report),
        Format::Csv => output::eval_csv(report),
    }
}

fn evaluate(args: &EvaluateArgs, g: &GlobalOpts) -> Result<()> {
    let started = std::time::Instant::now();
    let records = load_records(&args.corpus)?;
    let predictions = args.predictions.as_deref().map(read_predictions).transpose()?;
    let classifier: Option<Box<dyn Classifier>> = match &args.classifier {
        Some(spec) => Some(crate::scorer::open(spec, g)? as Box<dyn Classifier>),
        None => None,
    };
    let opts = EvaluateOptions {
        oracle: args.oracle.into(),
        overlap: args.overlap,
    };
    let per_record = evaluate_records(&records, predictions.as_deref(), classifier.as_deref(), &opts, g.workers())?;
    let config = json!({
        "command": "evaluate",
        "corpus": args.corpus,
        "predictions": args.predictions,
        "classifier": args.classifier,
        "oracle": opts.oracle,
        "overlap": opts.overlap,
        "seed": g.seed,
    });
    let wall = if g.no_timing { 0.0 } else { started.elapsed().as_secs_f64() };
    let report = EvalReport::new(per_record, config, wall);
    note(g, format!("evaluated {} records; rouge1.f1 {:.4}", report.aggregate.records, report.aggregate.rouge1.f1));
    emit(args.out.as_deref(), &eval_text(&report, g.format)?)
}

fn analyze(args: &AnalyzeArgs, g: &GlobalOpts) -> Result<()> {
    let records = load_records(&args.corpus)?;
    let field: LabelField = args.labels.into();
    let mut sequences = Vec::with_capacity(records.len());
    for record in &records {
        let labels = field
            .get(record)
            .ok_or_else(|| PipelineError::MissingLabels(record.id.clone(), field.name()))?;
        sequences.push(labels.clone());
    }
    let order = if args.dedupe_first {
        NormalizeOrder::CollapseThenRemove
    } else {
        NormalizeOrder::RemoveThenCollapse
    };
    let dist = pattern_distribution_with(&sequences, order)?;
    let text = match g.format {
        Format::Json => output::json(&dist)?,
        Format::Csv => output::distribution_csv(&dist)?,
    };
    emit(args.out.as_deref(), &text)?;
    let table = dist.render_top(args.top_k);
    if args.out.is_some() {
        print!("{table}");
    } else if !g.quiet {
        eprint!("{table}");
    }
    Ok(())
}

fn prompt(cmd: &PromptCommand) -> Result<()> {
    match cmd {
        PromptCommand::Build { labels, input, style } => {
            let cfg = prompt_config(style)?;
            let labels = parse_structure(labels)?;
            let document = read_input(input)?;
            let prompted = build_prompt(&labels, document.trim_end_matches('\n'), &cfg)?;
            emit(None, &format!("{prompted}\n"))
        }
        PromptCommand::Parse { input, style } => {
            let cfg = prompt_config(style)?;
            let text = read_input(input)?;
            let (labels, document) = parse_prompt(text.trim_end_matches('\n'), &cfg)?;
            emit(None, &output::json(&json!({ "labels": labels, "document": document }))?)
        }
    }
}

fn decode(args: &DecodeArgs, g: &GlobalOpts) -> Result<()> {
    let cfg = decode_config(&args.decoder, g)?;
    let document = read_input(&args.input)?;
    let scorer = crate::scorer::open(&args.decoder.scorer, g)?;
    let trace = match args.kind {
        DecodeKind::Sentbs => {
            let text = args.structure.as_deref().ok_or_else(|| anyhow!("sentbs needs --structure"))?;
            decode_sentbs(&document, &parse_structure(text)?, &scorer, &cfg)
        }
        DecodeKind::Unconstrained => decode_unconstrained(&document, &scorer, &cfg),
        DecodeKind::Forced => {
            let words = args.exact_words.ok_or_else(|| anyhow!("forced needs --exact-words"))?;
            forced_length_decode(&document, &scorer, &cfg, words)
        }
    };
    let trace = match trace {
        Ok(trace) => trace,
        Err(structsum_core::decoder::DecodeError::Scorer { source, partial }) => {
            if let Some(path) = &args.trace {
                emit(Some(path), &output::json(&partial)?)?;
            }
            return Err(source.into());
        }
        Err(other) => return Err(other.into()),
    };
    if let Some(path) = &args.trace {
        emit(Some(path), &output::json(&trace)?)?;
    }
    note(g, format!("realized structure: {}", trace.realized_labels));
    emit(None, &format!("{}\n", trace.final_summary))
}

fn label(args: &LabelArgs, g: &GlobalOpts) -> Result<()> {
    if !(0.0..=1.0).contains(&args.min_confidence) {
        bail!("--min-confidence must lie in [0, 1]");
    }
    let records = load_records(&args.corpus)?;
    let classifier = crate::scorer::open(&args.classifier, g)?;
    let (labeled, report) = silver_label(records, &classifier, args.min_confidence, g.workers())?;
    write_corpus(&args.out, &labeled)?;
    emit(None, &output::json(&report)?)
}

/// Loads an evaluation report; `path#system` picks one system of a run report.
fn load_report(spec: &str) -> Result<EvalReport> {
    let (path, system) = match spec.rsplit_once('#') {
        Some((path, system)) => (path, Some(system)),
        None => (spec, None),
    };
    let text = read_input(Path::new(path))?;
    match system {
        None => serde_json::from_str(&text).with_context(|| format!("{path} is not an evaluation report")),
        Some(name) => {
            let run: RunReport =
                serde_json::from_str(&text).with_context(|| format!("{path} is not a run report"))?;
            run.systems
                .into_iter()
                .find(|s| s.system.name() == name)
                .map(|s| s.report)
                .ok_or_else(|| anyhow!("{path} has no system {name:?}"))
        }
    }
}

fn compare(args: &CompareArgs, g: &GlobalOpts) -> Result<ExitCode> {
    let (a, b) = (load_report(&args.a)?, load_report(&args.b)?);
    let result = compare_reports(&a, &b, &args.metric, args.confidence, args.resamples, g.seed)?;
    note(
        g,
        format!(
            "{}: mean diff {:.4}, {:.0}% CI [{:.4}, {:.4}]{}",
            args.metric,
            result.mean_diff,
            result.confidence * 100.0,
            result.ci_low,
            result.ci_high,
            if result.significant { ", significant" } else { "" }
        ),
    );
    emit(args.out.as_deref(), &output::json(&result)?)?;
    Ok(if result.significant && args.fail_on_significant {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn run_text(report: &RunReport, format: Format) -> Result<String> {
    match format {
        Format::Json => output::json(report),
        Format::Csv => output::run_csv(report),
    }
}

fn run(args: &RunArgs, g: &GlobalOpts) -> Result<()> {
    let (records, corpus_name) = match &args.corpus {
        Some(path) => (load_records(path)?, json!(path)),
        None => (parse_corpus(BUNDLED_CORPUS)?, json!("bundled")),
    };
    let mut decode = decode_config(&args.decoder, g)?;
    decode.record_timing = false;
    let opts = EndToEndOptions {
        systems: args
            .systems
            .iter()
            .map(|s| match s {
                SystemChoice::Sentbs => SystemKind::Sentbs,
                SystemChoice::Nostructure => SystemKind::Nostructure,
                SystemChoice::Strong => SystemKind::Strong,
            })
            .collect(),
        structure_source: args.structure_source.into(),
        decode,
        prompt: prompt_config(&args.style)?,
        overlap: args.overlap,
        record_timing: !g.no_timing,
    };
    let scorer = crate::scorer::open(&args.decoder.scorer, g)?;
    let with_context = |mut report: RunReport| {
        if let Value::Object(map) = &mut report.config {
            map.insert("command".into(), json!("run"));
            map.insert("corpus".into(), corpus_name.clone());
            map.insert("scorer".into(), json!(args.decoder.scorer));
            map.insert("seed".into(), json!(g.seed));
        }
        report
    };
    match end_to_end(&records, &scorer, &opts, g.workers()) {
        Ok(report) => {
            let report = with_context(report);
            for system in &report.systems {
                let agg = &system.report.aggregate;
                note(
                    g,
                    format!(
                        "{:<12} rouge1.f1 {:.4}  structure_similarity {:.4}  {:.3}s",
                        system.system.name(),
                        agg.rouge1.f1,
                        agg.structure_similarity.unwrap_or(0.0),
                        system.report.wall_clock_seconds
                    ),
                );
            }
            emit(args.out.as_deref(), &run_text(&report, g.format)?)
        }
        Err(PipelineError::Decode { id, source, partial }) => {
            if args.keep_partial {
                emit(args.out.as_deref(), &run_text(&with_context(*partial), g.format)?)?;
                note(g, "partial results written");
            }
            Err(anyhow!("record {id:?}: {source}"))
        }
        Err(other) => Err(other.into()),
    }
}

fn synth(args: &SynthArgs, g: &GlobalOpts) -> Result<()> {
    let banks = match &g.mock_banks {
        Some(path) => SentenceBanks::from_json(&read_input(path)?)?,
        None => SentenceBanks::bundled(),
    };
    let records = synthetic::corpus(&banks, args.n, g.seed);
    match &args.out {
        Some(path) => Ok(write_corpus(path, &records)?),
        None => emit(None, &records_to_string(&records)),
    }
}
