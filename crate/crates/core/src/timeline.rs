//! Beat timelines: audio beats on the upper row, visual beats on the lower
//! row, synchronized pairs joined by a line.

use std::fmt::Write;

use crate::beats::BeatSequence;
use crate::pipeline::HarmonyReport;
use crate::Scalar;

/// Everything a timeline needs; `audio_hits` is `None` when sync status is unknown.
#[derive(Debug, Clone)]
pub struct Timeline {
    pub audio: Vec<(f64, f64)>,
    pub audio_hits: Option<Vec<bool>>,
    /// Index into `visual` matched by each audio beat.
    pub matches: Vec<Option<usize>>,
    pub visual: Vec<(f64, f64)>,
}

fn pairs<T: Scalar>(beats: &BeatSequence<T>) -> Vec<(f64, f64)> {
    beats
        .iter()
        .map(|(t, s)| (t.to_f64_lossy(), s.to_f64_lossy()))
        .collect()
}

impl Timeline {
    pub fn from_report<T: Scalar>(report: &HarmonyReport<T>) -> Self {
        Self {
            audio: pairs(&report.audio_beats),
            audio_hits: Some(report.alignment.hp.clone()),
            matches: report.alignment.matched_index.clone(),
            visual: pairs(&report.visual_beats),
        }
    }

    pub fn from_beats<T: Scalar>(audio: &BeatSequence<T>, visual: Option<&BeatSequence<T>>) -> Self {
        Self {
            audio: pairs(audio),
            audio_hits: None,
            matches: vec![None; audio.len()],
            visual: visual.map(pairs).unwrap_or_default(),
        }
    }

    /// Visual beats that some synchronized audio beat matched.
    fn visual_hits(&self) -> Vec<bool> {
        let mut hit = vec![false; self.visual.len()];
        if let Some(hp) = &self.audio_hits {
            for (m, &h) in self.matches.iter().zip(hp) {
                if let (Some(k), true) = (m, h) {
                    if let Some(slot) = hit.get_mut(*k) {
                        *slot = true;
                    }
                }
            }
        }
        hit
    }

    /// `time,stream,saliency,hp` rows, audio first then visual.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,stream,saliency,hp\n");
        for (i, (t, s)) in self.audio.iter().enumerate() {
            let hp = match &self.audio_hits {
                Some(h) => (h[i] as u8).to_string(),
                None => String::new(),
            };
            let _ = writeln!(out, "{t},audio,{s},{hp}");
        }
        let vh = self.visual_hits();
        for ((t, s), h) in self.visual.iter().zip(vh) {
            let hp = if self.audio_hits.is_some() {
                (h as u8).to_string()
            } else {
                String::new()
            };
            let _ = writeln!(out, "{t},visual,{s},{hp}");
        }
        out
    }

    pub fn to_svg(&self) -> String {
        const WIDTH: f64 = 1000.0;
        const MARGIN: f64 = 40.0;
        const AUDIO_Y: f64 = 60.0;
        const VISUAL_Y: f64 = 140.0;
        let has_visual = !self.visual.is_empty();
        let height = if has_visual { 200.0 } else { 110.0 };
        let t_max = self
            .audio
            .iter()
            .chain(&self.visual)
            .map(|(t, _)| *t)
            .fold(0.0f64, f64::max)
            .max(1e-9);
        let x = |t: f64| MARGIN + (WIDTH - 2.0 * MARGIN) * t / t_max;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r##"<line class="row" x1="{MARGIN}" y1="{AUDIO_Y}" x2="{}" y2="{AUDIO_Y}" stroke="#999"/>"##,
            WIDTH - MARGIN
        );
        let _ = writeln!(svg, r#"<text x="4" y="{}" font-size="12">+1 audio</text>"#, AUDIO_Y - 8.0);
        if has_visual {
            let _ = writeln!(
                svg,
                r##"<line class="row" x1="{MARGIN}" y1="{VISUAL_Y}" x2="{}" y2="{VISUAL_Y}" stroke="#999"/>"##,
                WIDTH - MARGIN
            );
            let _ = writeln!(svg, r#"<text x="4" y="{}" font-size="12">-1 visual</text>"#, VISUAL_Y + 20.0);
        }

        if let Some(hp) = &self.audio_hits {
            for ((i, m), &h) in self.matches.iter().enumerate().zip(hp) {
                if let (Some(k), true) = (m, h) {
                    if let Some((vt, _)) = self.visual.get(*k) {
                        let _ = writeln!(
                            svg,
                            r##"<line class="sync" x1="{:.2}" y1="{AUDIO_Y}" x2="{:.2}" y2="{VISUAL_Y}" stroke="#2a2" stroke-dasharray="3,3"/>"##,
                            x(self.audio[i].0),
                            x(*vt)
                        );
                    }
                }
            }
        }

        for (i, (t, _)) in self.audio.iter().enumerate() {
            let (class, color) = match &self.audio_hits {
                Some(h) if h[i] => ("audio hit", "#2a2"),
                Some(_) => ("audio miss", "#d22"),
                None => ("audio", "#333"),
            };
            let _ = writeln!(
                svg,
                r#"<circle class="{class}" cx="{:.2}" cy="{AUDIO_Y}" r="5" fill="{color}"><title>{t:.3} s</title></circle>"#,
                x(*t)
            );
        }
        for (t, _) in &self.visual {
            let _ = writeln!(
                svg,
                r##"<rect class="visual" x="{:.2}" y="{}" width="8" height="8" fill="#36c"><title>{t:.3} s</title></rect>"##,
                x(*t) - 4.0,
                VISUAL_Y - 4.0
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}
