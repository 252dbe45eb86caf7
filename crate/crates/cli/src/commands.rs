use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use harmo_core::meter::analyze_meter;
use harmo_core::pipeline::{audio_beats, visual_beats};
use harmo_core::testkit::{gen_pair, SynthSpec};
use harmo_core::timeline::Timeline;
use harmo_core::{
    apply_mask, audio_saliency_mask, evaluate_pair, load_audio, visual_saliency_mask,
    visual_saliency_transform, AnalysisConfig, BeatSequence, HarmonyReport, PoseSequence,
};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::json;

use crate::fail::{CliError, CONFIG, DEGENERATE, INPUT};
use crate::output::{emit, emit_with};

fn is_ext(path: &Path, ext: &str) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::new(INPUT, format!("cannot read {}: {e}", path.display())))
}

fn report_for(
    audio: &Path,
    poses: &Path,
    pose_fps: Option<f64>,
    cfg: &AnalysisConfig,
) -> Result<HarmonyReport, CliError> {
    let clip = load_audio::<f64>(audio)?;
    let poses = PoseSequence::read(poses, pose_fps)?;
    Ok(evaluate_pair(&clip, &poses, cfg)?)
}

pub fn analyze(
    audio: &Path,
    poses: &Path,
    pose_fps: Option<f64>,
    cfg: &AnalysisConfig,
    out: Option<&Path>,
    csv: bool,
) -> Result<u8, CliError> {
    let report = report_for(audio, poses, pose_fps, cfg)?;
    for w in &report.warnings {
        eprintln!("harmo: warning: {w}");
    }
    let text = if csv {
        format!("{}\n{}\n", HarmonyReport::<f64>::CSV_HEADER, report.to_csv_row())
    } else {
        report.to_json()
    };
    emit(out, &text)?;
    Ok(if report.is_degenerate() { DEGENERATE } else { 0 })
}

struct StreamBeats {
    name: &'static str,
    raw: BeatSequence,
    salient: BeatSequence,
}

fn salient_audio(path: &Path, cfg: &AnalysisConfig) -> Result<StreamBeats, CliError> {
    let clip = load_audio::<f64>(path)?;
    let raw = audio_beats(&clip, cfg)?;
    let salient = apply_mask(&raw, &audio_saliency_mask(&raw, cfg.lambda1))?;
    Ok(StreamBeats { name: "audio", raw, salient })
}

fn salient_visual(path: &Path, pose_fps: Option<f64>, cfg: &AnalysisConfig) -> Result<StreamBeats, CliError> {
    let poses = PoseSequence::read(path, pose_fps)?;
    let (raw, j0) = visual_beats(&poses, cfg)?;
    let starred = visual_saliency_transform(&raw, j0);
    let salient = apply_mask(&starred, &visual_saliency_mask(&starred, cfg.lambda2))?;
    Ok(StreamBeats { name: "visual", raw, salient })
}

pub fn beats(
    audio: Option<&Path>,
    poses: Option<&Path>,
    pose_fps: Option<f64>,
    cfg: &AnalysisConfig,
    out: Option<&Path>,
    csv: bool,
) -> Result<u8, CliError> {
    let mut streams = Vec::new();
    if let Some(p) = audio {
        streams.push(salient_audio(p, cfg)?);
    }
    if let Some(p) = poses {
        streams.push(salient_visual(p, pose_fps, cfg)?);
    }
    let text = if csv {
        let mut s = String::from("stream,stage,time,saliency\n");
        for st in &streams {
            for (stage, seq) in [("raw", &st.raw), ("salient", &st.salient)] {
                for (t, v) in seq.iter() {
                    let _ = writeln!(s, "{},{stage},{t},{v}", st.name);
                }
            }
        }
        s
    } else {
        let mut doc = serde_json::Map::new();
        for st in &streams {
            doc.insert(st.name.into(), json!({ "raw": st.raw, "salient": st.salient }));
        }
        serde_json::to_string_pretty(&doc).expect("beats serialize")
    };
    emit(out, &text)?;
    Ok(0)
}

#[derive(Deserialize)]
struct StreamDoc {
    salient: BeatSequence,
}

/// Beats from a beat JSON: either a bare `{"times","saliency"}` sequence or
/// the output of `harmo beats`.
fn beats_from_json(path: &Path) -> Result<(Option<BeatSequence>, Option<BeatSequence>), CliError> {
    let text = read_text(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::new(INPUT, format!("{}: {e}", path.display())))?;
    let bad = |e: serde_json::Error| CliError::new(INPUT, format!("{}: {e}", path.display()));
    if value.get("times").is_some() {
        return Ok((Some(serde_json::from_value(value).map_err(bad)?), None));
    }
    let stream = |key: &str| -> Result<Option<BeatSequence>, CliError> {
        match value.get(key) {
            Some(v) => Ok(Some(serde_json::from_value::<StreamDoc>(v.clone()).map_err(bad)?.salient)),
            None => Ok(None),
        }
    };
    let (a, v) = (stream("audio")?, stream("visual")?);
    if a.is_none() && v.is_none() {
        return Err(CliError::new(INPUT, format!("{}: no beats found", path.display())));
    }
    Ok((a, v))
}

pub fn meter(
    input: &Path,
    fps: f64,
    cfg: &AnalysisConfig,
    out: Option<&Path>,
    csv: bool,
) -> Result<u8, CliError> {
    let beats = if is_ext(input, "json") {
        beats_from_json(input)?
            .0
            .ok_or_else(|| CliError::new(INPUT, "beat file has no audio beats"))?
    } else {
        salient_audio(input, cfg)?.salient
    };
    let report = analyze_meter(&beats, fps, cfg.transition_beats)?;
    let text = if csv {
        let mut s = String::from("t_start,t_end,meter,transition_beats\n");
        for u in &report.units {
            let _ = writeln!(s, "{},{},{},{}", u.t_start, u.t_end, u.meter, u.transition_beats);
        }
        s
    } else {
        serde_json::to_string_pretty(&report).expect("meter report serializes")
    };
    emit(out, &text)?;
    Ok(0)
}

pub fn synth(spec_path: Option<&Path>, out_dir: &Path, seed: Option<u64>, pose_csv: bool) -> Result<u8, CliError> {
    let mut spec = match spec_path {
        Some(p) => serde_json::from_str::<SynthSpec>(&read_text(p)?)
            .map_err(|e| CliError::new(CONFIG, format!("{}: {e}", p.display())))?,
        None => SynthSpec::default(),
    };
    if let Some(s) = seed {
        spec.rng_seed = s;
    }
    let pair = gen_pair::<f64>(&spec)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::new(INPUT, format!("cannot create {}: {e}", out_dir.display())))?;

    emit_with(&out_dir.join("audio.wav"), |tmp| Ok(pair.audio.write_wav(tmp)?))?;
    if pose_csv {
        emit(Some(&out_dir.join("poses.csv")), &pair.poses.to_csv())?;
    } else {
        emit(Some(&out_dir.join("poses.json")), &pair.poses.to_json())?;
    }
    let truth = json!({
        "spec": spec,
        "click_times": pair.click_times,
        "knots": pair.knots,
    });
    emit(Some(&out_dir.join("truth.json")), &serde_json::to_string_pretty(&truth).expect("truth serializes"))?;
    Ok(0)
}

pub fn plot(input: &Path, output: &Path) -> Result<u8, CliError> {
    let text = read_text(input)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::new(INPUT, format!("{}: {e}", input.display())))?;
    let timeline = if value.get("alignment").is_some() {
        let report: HarmonyReport = serde_json::from_value(value)
            .map_err(|e| CliError::new(INPUT, format!("{}: {e}", input.display())))?;
        Timeline::from_report(&report)
    } else {
        let (audio, visual) = beats_from_json(input)?;
        Timeline::from_beats(&audio.unwrap_or_else(BeatSequence::empty), visual.as_ref())
    };
    let rendered = if is_ext(output, "svg") {
        timeline.to_svg()
    } else if is_ext(output, "csv") {
        timeline.to_csv()
    } else {
        return Err(CliError::new(INPUT, format!("{}: expected a .svg or .csv output", output.display())));
    };
    emit(Some(output), &rendered)?;
    Ok(0)
}

struct Job {
    name: String,
    audio: PathBuf,
    poses: PathBuf,
}

fn read_manifest(path: &Path) -> Result<Vec<Job>, CliError> {
    let base = path.parent().unwrap_or(Path::new("."));
    let text = read_text(path)?;
    let mut rows = text.lines().filter(|l| !l.trim().is_empty());
    let bad = |msg: String| CliError::new(INPUT, format!("{}: {msg}", path.display()));
    let header: Vec<&str> = rows
        .next()
        .ok_or_else(|| bad("empty manifest".into()))?
        .split(',')
        .map(str::trim)
        .collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let (ai, pi) = match (col("audio"), col("poses")) {
        (Some(a), Some(p)) => (a, p),
        _ => return Err(bad("header must name `audio` and `poses` columns".into())),
    };
    let ni = col("name");
    rows.enumerate()
        .map(|(i, line)| {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            let cell = |k: usize| cells.get(k).copied().ok_or_else(|| bad(format!("row {} is short", i + 1)));
            let audio = base.join(cell(ai)?);
            let name = match ni {
                Some(k) => cell(k)?.to_string(),
                None => format!(
                    "{:04}_{}",
                    i,
                    audio.file_stem().map_or("pair".into(), |s| s.to_string_lossy())
                ),
            };
            Ok(Job { name, audio, poses: base.join(cell(pi)?) })
        })
        .collect()
}

pub fn batch(
    manifest: &Path,
    out_dir: &Path,
    jobs: Option<usize>,
    pose_fps: Option<f64>,
    cfg: &AnalysisConfig,
) -> Result<u8, CliError> {
    let work = read_manifest(manifest)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::new(INPUT, format!("cannot create {}: {e}", out_dir.display())))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::new(CONFIG, e.to_string()))?;
    let results: Vec<Result<HarmonyReport, CliError>> = pool.install(|| {
        work.par_iter()
            .map(|job| {
                let report = report_for(&job.audio, &job.poses, pose_fps, cfg)?;
                emit(Some(&out_dir.join(format!("{}.json", job.name))), &report.to_json())?;
                Ok(report)
            })
            .collect()
    });

    let blanks = ",".repeat(HarmonyReport::<f64>::CSV_HEADER.matches(',').count());
    let mut summary = format!("name,{},error\n", HarmonyReport::<f64>::CSV_HEADER);
    let (mut failed, mut degenerate) = (false, false);
    for (job, result) in work.iter().zip(&results) {
        match result {
            Ok(r) => {
                degenerate |= r.is_degenerate();
                let _ = writeln!(summary, "{},{},", job.name, r.to_csv_row());
            }
            Err(e) => {
                failed = true;
                eprintln!("harmo: {}: {e}", job.name);
                let _ = writeln!(summary, "{},{blanks},\"{}\"", job.name, e.message.replace('"', "'"));
            }
        }
    }
    emit(Some(&out_dir.join("summary.csv")), &summary)?;
    Ok(if failed {
        INPUT
    } else if degenerate {
        DEGENERATE
    } else {
        0
    })
}
