use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::anyhow;
use serde::Serialize;
use sima_core::captions::{concat_tracks, AlignConfig};
use sima_core::diag::has_errors;
use sima_core::manifest::{manifest_entries, validate_transition_graphic};
use sima_core::script::AnnotatedScript;
use sima_core::timeline::{EdlMetadata, OverlayPlacement};
use sima_core::workload::{estimate_pipeline, PipelinePlan, WorkloadEstimate};
use sima_core::{
    align_parts, compile_split, export_captions as render_captions, export_edl, generate_manifest, parse_captions,
    plan_splits, polish_captions, serialize_script, transition_graphic_name, validate_script, validate_thumbnails,
    verify_assets, AlignedScript, AssetMetadata, CaptionFormat, CompiledSplit, CoverageReport, CutList, Diagnostic,
    FitResult, Polished, SplitId, SplitPlan,
};

use crate::config::Settings;
use crate::io::{display_name, load_script, read, write_atomic, Console, Failure, OrFail};

pub struct Context {
    pub settings: Settings,
    pub json: bool,
    pub stamp: bool,
}

impl Context {
    fn console(&self, file: &Path) -> Console {
        Console { json: self.json, file: display_name(file) }
    }

    fn out(&self, name: &str) -> PathBuf {
        self.settings.out_dir.join(name)
    }

    fn stamp(&self) -> Option<u64> {
        self.stamp.then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitArg {
    All,
    One(SplitId),
}

pub fn parse_split_arg(s: &str) -> Result<SplitArg, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(SplitArg::All);
    }
    s.parse().map(SplitArg::One)
}

/// Result type of every subcommand: `Ok(true)` when no ERROR diagnostic
/// was produced.
type Outcome = Result<bool, Failure>;

#[derive(Serialize)]
struct DiagnosticsReport<'a> {
    file: &'a str,
    diagnostics: &'a [Diagnostic],
}

/// Reports a script that failed to parse.
fn parse_failure(console: &Console, diag: Diagnostic) -> Outcome {
    let diags = [diag];
    if console.json {
        console.emit_json(&DiagnosticsReport { file: &console.file, diagnostics: &diags })?;
    } else {
        console.diagnostics(&diags);
    }
    Ok(false)
}

pub fn parse(ctx: &Context) -> Outcome {
    let path = ctx.settings.script_path().setup()?;
    let console = ctx.console(path);
    let script = match load_script(path)? {
        Ok(s) => s,
        Err(d) => return parse_failure(&console, d),
    };
    if ctx.json {
        console.emit_json(&script)?;
    } else {
        print!("{}", serialize_script(&script));
    }
    Ok(true)
}

pub fn validate(ctx: &Context) -> Outcome {
    let path = ctx.settings.script_path().setup()?;
    let console = ctx.console(path);
    let script = match load_script(path)? {
        Ok(s) => s,
        Err(d) => return parse_failure(&console, d),
    };
    let diags = validate_script(&script, &ctx.settings.validate());
    if ctx.json {
        console.emit_json(&DiagnosticsReport { file: &console.file, diagnostics: &diags })?;
    } else {
        console.diagnostics(&diags);
        console.summary(&diags);
    }
    Ok(!has_errors(&diags))
}

/// Script plus validation, stopping on anything fatal.
fn checked_script(ctx: &Context, console: &Console) -> Result<Result<AnnotatedScript, Vec<Diagnostic>>, Failure> {
    let path = ctx.settings.script_path().setup()?;
    let script = match load_script(path)? {
        Ok(s) => s,
        Err(d) => return Ok(Err(vec![d])),
    };
    let diags = validate_script(&script, &ctx.settings.validate());
    if has_errors(&diags) {
        return Ok(Err(diags));
    }
    if !console.json {
        console.diagnostics(&diags);
    }
    Ok(Ok(script))
}

fn report_fatal(console: &Console, diags: &[Diagnostic]) -> Outcome {
    if console.json {
        console.emit_json(&DiagnosticsReport { file: &console.file, diagnostics: diags })?;
    } else {
        console.diagnostics(diags);
        console.summary(diags);
    }
    Ok(false)
}

fn splits_for(ctx: &Context, script: &AnnotatedScript, which: SplitArg) -> Result<Vec<SplitPlan>, Failure> {
    let all = plan_splits(script.final_part(), ctx.settings.splits).setup()?;
    if ctx.settings.captions.len() != all.len() {
        return Err(Failure::Setup(anyhow!(
            "{} caption file(s) configured for {} split(s); list one per split in split order",
            ctx.settings.captions.len(),
            all.len()
        )));
    }
    match which {
        SplitArg::All => Ok(all),
        SplitArg::One(id) => match all.iter().find(|s| s.id == id) {
            Some(s) => Ok(vec![*s]),
            None => Err(Failure::Setup(anyhow!("split {id} does not exist; the plan has {}", all.len()))),
        },
    }
}

fn caption_format(path: &Path) -> Result<CaptionFormat, Failure> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    ext.parse().map_err(|e: String| Failure::Setup(anyhow!("{}: {e}", path.display())))
}

struct SplitCaptions {
    format: CaptionFormat,
    polished: Polished,
}

fn polish_split(ctx: &Context, split: &SplitPlan) -> Result<SplitCaptions, Failure> {
    let path = &ctx.settings.captions[split.id.index()];
    let format = caption_format(path)?;
    let raw = parse_captions(&read(path)?, format).map_err(|e| Failure::Input(anyhow!("{}: {e}", path.display())))?;
    Ok(SplitCaptions { format, polished: polish_captions(&raw, &ctx.settings.polish()) })
}

fn align_split(script: &AnnotatedScript, split: &SplitPlan, caps: &SplitCaptions) -> Result<AlignedScript, Failure> {
    let mut aligned = align_parts(script, split.parts(), &caps.polished.cues, &AlignConfig::default())
        .map_err(|e| Failure::Input(anyhow!("split {}: {e}", split.id)))?;
    aligned.duration_ms = aligned.duration_ms.max(caps.polished.duration_ms);
    Ok(aligned)
}

#[derive(Serialize)]
struct CaptionSummary<'a> {
    split: SplitId,
    raw_duration_ms: u64,
    duration_ms: u64,
    cuts: &'a CutList,
    sentences: usize,
}

pub fn captions(ctx: &Context, which: SplitArg) -> Outcome {
    let console = ctx.console(ctx.settings.script_path().setup()?);
    let script = match checked_script(ctx, &console)? {
        Ok(s) => s,
        Err(diags) => return report_fatal(&console, &diags),
    };
    let splits = splits_for(ctx, &script, which)?;
    let mut done = Vec::new();
    for split in &splits {
        let caps = polish_split(ctx, split)?;
        let aligned = align_split(&script, split, &caps)?;
        let ext = caps.format.extension();
        write_atomic(
            &ctx.out(&format!("split{}.polished.{ext}", split.id)),
            &render_captions(&caps.polished.cues, caps.format),
        )?;
        write_atomic(&ctx.out(&format!("split{}.cuts.json", split.id)), &pretty(&caps.polished.cuts)?)?;
        write_atomic(&ctx.out(&format!("split{}.timing.json", split.id)), &pretty(&aligned)?)?;
        done.push((*split, caps, aligned));
    }
    let summaries: Vec<CaptionSummary> = done
        .iter()
        .map(|(s, c, a)| CaptionSummary {
            split: s.id,
            raw_duration_ms: c.polished.raw_duration_ms,
            duration_ms: c.polished.duration_ms,
            cuts: &c.polished.cuts,
            sentences: a.timings.len(),
        })
        .collect();
    if ctx.json {
        console.emit_json(&summaries)?;
    } else {
        for s in &summaries {
            println!(
                "split {}: {} -> {} ({} cut(s), {} sentence(s) aligned)",
                s.split,
                clock(s.raw_duration_ms),
                clock(s.duration_ms),
                s.cuts.cuts.len(),
                s.sentences
            );
        }
    }
    Ok(true)
}

fn pretty<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).setup()?;
    s.push('\n');
    Ok(s)
}

/// `h:mm:ss.mmm`, for console summaries.
fn clock(ms: u64) -> String {
    format!("{}:{:02}:{:02}.{:03}", ms / 3_600_000, ms / 60_000 % 60, ms / 1000 % 60, ms % 1000)
}

#[derive(Serialize)]
struct CompileReport<'a> {
    split: SplitId,
    parts: [usize; 2],
    duration_ms: u64,
    raw_duration_ms: u64,
    cuts: &'a CutList,
    fits: &'a [FitResult],
    coverage: &'a CoverageReport,
    overlays: &'a [OverlayPlacement],
    diagnostics: &'a [Diagnostic],
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_unix_s: Option<u64>,
}

fn compile_one(
    ctx: &Context,
    script: &AnnotatedScript,
    split: &SplitPlan,
) -> Result<(CompiledSplit, Polished), Failure> {
    let caps = polish_split(ctx, split)?;
    let aligned = align_split(script, split, &caps)?;
    let compiled = compile_split(script, &aligned, split, &ctx.settings.compile())
        .map_err(|e| Failure::Input(anyhow!("split {}: {e}", split.id)))?;
    Ok((compiled, caps.polished))
}

pub fn compile(ctx: &Context, which: SplitArg) -> Outcome {
    let script_path = ctx.settings.script_path().setup()?;
    let console = ctx.console(script_path);
    let script = match checked_script(ctx, &console)? {
        Ok(s) => s,
        Err(diags) => return report_fatal(&console, &diags),
    };
    let splits = splits_for(ctx, &script, which)?;

    // Splits are independent; results come back in split order whatever
    // order the threads finish in.
    let results: Vec<Result<(CompiledSplit, Polished), Failure>> = std::thread::scope(|scope| {
        let handles: Vec<_> = splits.iter().map(|split| scope.spawn(|| compile_one(ctx, &script, split))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Failure::Input(anyhow!("compiler panicked")))))
            .collect()
    });
    let compiled: Vec<(CompiledSplit, Polished)> = results.into_iter().collect::<Result<_, _>>()?;

    let source = display_name(script_path);
    let mut merged = script.clone();
    let stamp = ctx.stamp();
    let mut clean = true;
    let mut reports = Vec::new();
    for (c, polished) in &compiled {
        let id = c.split.id;
        let meta = EdlMetadata { source: source.clone(), parts: [c.split.first_part, c.split.last_part] };
        write_atomic(&ctx.out(&format!("split{id}.edl")), &export_edl(&c.timeline, &meta))?;
        let report = CompileReport {
            split: id,
            parts: meta.parts,
            duration_ms: c.timeline.duration_ms,
            raw_duration_ms: polished.raw_duration_ms,
            cuts: &polished.cuts,
            fits: &c.fits,
            coverage: &c.coverage,
            overlays: &c.overlays,
            diagnostics: &c.diagnostics,
            generated_unix_s: stamp,
        };
        write_atomic(&ctx.out(&format!("split{id}.report.json")), &pretty(&report)?)?;
        for p in c.split.parts() {
            merged.parts[p - 1] = c.script.parts[p - 1].clone();
        }
        clean &= !has_errors(&c.diagnostics);
        reports.push(report);
    }
    write_atomic(&ctx.out("script.sima.md"), &serialize_script(&merged))?;

    if ctx.json {
        console.emit_json(&reports)?;
    } else {
        for (r, (c, _)) in reports.iter().zip(&compiled) {
            console.diagnostics(r.diagnostics);
            println!(
                "split {} (parts {}-{}): {}, {} clip(s) fitted, {} gap(s), {} overlay(s) -> split{}.edl",
                r.split,
                r.parts[0],
                r.parts[1],
                clock(r.duration_ms),
                r.fits.len(),
                c.coverage.gaps.len(),
                r.overlays.len(),
                r.split
            );
        }
    }
    Ok(clean)
}

#[derive(Serialize)]
struct ManifestReport<'a> {
    images: &'a str,
    videos: &'a str,
}

pub fn manifest(ctx: &Context) -> Outcome {
    let path = ctx.settings.script_path().setup()?;
    let console = ctx.console(path);
    let script = match load_script(path)? {
        Ok(s) => s,
        Err(d) => return parse_failure(&console, d),
    };
    let (images, videos) = generate_manifest(&script).input()?;
    write_atomic(&ctx.out("images.txt"), &images)?;
    write_atomic(&ctx.out("videos.txt"), &videos)?;
    if ctx.json {
        console.emit_json(&ManifestReport { images: &images, videos: &videos })?;
    } else {
        print!("# images\n{images}# videos\n{videos}");
    }
    Ok(true)
}

pub fn verify(ctx: &Context) -> Outcome {
    let path = ctx.settings.script_path().setup()?;
    let console = ctx.console(path);
    let script = match load_script(path)? {
        Ok(s) => s,
        Err(d) => return parse_failure(&console, d),
    };
    let meta_path = ctx.settings.metadata_path().setup()?;
    let metas: Vec<AssetMetadata> =
        serde_json::from_str(&read(meta_path)?).map_err(|e| Failure::Input(anyhow!("{}: {e}", meta_path.display())))?;
    let entries = manifest_entries(&script).input()?;
    let mut diags = verify_assets(&entries, &metas, ctx.settings.verify_tolerance_ms());
    let parts = script.final_part();
    for part in 2..=parts {
        let name = transition_graphic_name(part, parts).input()?;
        let id = name.trim_end_matches(".png");
        match metas.iter().find(|m| m.id == id) {
            Some(m) => diags.extend(validate_transition_graphic(m)),
            None => diags.push(
                Diagnostic::error("MissingGraphic", format!("{name}: no transition graphic for part {part}"))
                    .at_part(part),
            ),
        }
    }
    diags.extend(validate_thumbnails(&metas));
    let console = Console { file: display_name(meta_path), ..console };
    if ctx.json {
        console.emit_json(&DiagnosticsReport { file: &console.file, diagnostics: &diags })?;
    } else {
        console.diagnostics(&diags);
        console.summary(&diags);
    }
    Ok(!has_errors(&diags))
}

pub fn estimate(ctx: &Context) -> Outcome {
    let s = &ctx.settings;
    let mut plan = PipelinePlan::uniform(s.runtime, s.parts, s.splits, s.senior_agents).setup()?;
    plan.finalization = s.finalization;
    let est = estimate_pipeline(&plan).setup()?;
    if ctx.json {
        let console = Console { json: true, file: String::new() };
        console.emit_json(&est)?;
    } else {
        print!("{}", estimate_table(&est));
    }
    Ok(true)
}

fn estimate_table(est: &WorkloadEstimate) -> String {
    let mut rows: Vec<[String; 5]> = vec![["step".into(), "name".into(), "role".into(), "hours".into(), "note".into()]];
    for i in &est.items {
        rows.push([
            i.step.to_string(),
            i.name.into(),
            i.role.to_string(),
            format!("{} h", i.hours),
            i.note.unwrap_or("").into(),
        ]);
    }
    let widths: Vec<usize> = (0..4).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in &rows {
        let line = format!(
            "{:>w0$}  {:<w1$}  {:<w2$}  {:>w3$}  {}",
            r[0],
            r[1],
            r[2],
            r[3],
            r[4],
            w0 = widths[0],
            w1 = widths[1],
            w2 = widths[2],
            w3 = widths[3]
        );
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out.push('\n');
    let totals = [
        ("human", est.human),
        ("junior agent", est.junior_agent),
        ("senior agent", est.senior_agent),
        ("senior wall clock", est.senior_wall_clock),
        ("critical path", est.critical_path),
    ];
    for (name, h) in totals {
        out.push_str(&format!("{name:<18} {h} h\n"));
    }
    for l in &est.split_loads {
        out.push_str(&format!("split {} -> senior agent {}: {} h\n", l.split, l.agent, l.hours));
    }
    out
}

pub fn export_captions(ctx: &Context, format: CaptionFormat) -> Outcome {
    let path = ctx.settings.script_path().setup()?;
    let console = ctx.console(path);
    let script = match load_script(path)? {
        Ok(s) => s,
        Err(d) => return parse_failure(&console, d),
    };
    let splits = splits_for(ctx, &script, SplitArg::All)?;
    let mut tracks = Vec::new();
    let mut offset = 0;
    for split in &splits {
        let caps = polish_split(ctx, split)?;
        let len = caps.polished.duration_ms;
        tracks.push((offset, caps.polished.cues));
        offset += len;
    }
    let cues = concat_tracks(&tracks);
    let name = format!("captions.{}", format.extension());
    write_atomic(&ctx.out(&name), &render_captions(&cues, format))?;
    if ctx.json {
        #[derive(Serialize)]
        struct Exported<'a> {
            file: &'a str,
            cues: usize,
            duration_ms: u64,
        }
        console.emit_json(&Exported { file: &name, cues: cues.len(), duration_ms: offset })?;
    } else {
        println!("{name}: {} cue(s), {}", cues.len(), clock(offset));
    }
    Ok(true)
}
