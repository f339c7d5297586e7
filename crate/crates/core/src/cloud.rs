//! Tag clouds over the most relevant recent news.
//!
//! Selection scores every document inside the time window on recency,
//! slot within its program, and how many other in-window documents share
//! enough keyphrases with it (coverage of the same story elsewhere makes
//! an item more cloud-worthy, not less). The top documents pool their top
//! keyphrases; phrase weight is the summed term frequency. Rendering is
//! arithmetic only — same entries and timestamp give byte-identical HTML.

use chrono::{DateTime, Duration, FixedOffset};
use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::rank::RankedKeyphrase;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudConfig {
    pub window_hours: i64,
    pub recency_weight: f64,
    pub position_weight: f64,
    pub duplication_weight: f64,
    /// Normalized keyphrases two documents must share to count as
    /// coverage of the same story.
    pub min_shared_keyphrases: usize,
    /// Documents feeding the cloud.
    pub n_news: usize,
    /// Keyphrases considered per selected document.
    pub phrases_per_doc: usize,
    /// Phrases kept in the rendered cloud.
    pub max_phrases: usize,
    pub font_min: f64,
    pub font_max: f64,
}

impl Default for CloudConfig {
    fn default() -> Self {
        CloudConfig {
            window_hours: 6,
            recency_weight: 0.4,
            position_weight: 0.3,
            duplication_weight: 0.3,
            min_shared_keyphrases: 3,
            n_news: 10,
            phrases_per_doc: 10,
            max_phrases: 20,
            font_min: 14.0,
            font_max: 42.0,
        }
    }
}

impl CloudConfig {
    pub fn validate(&self) -> Result<()> {
        let weights = [self.recency_weight, self.position_weight, self.duplication_weight];
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Config("cloud weights must be finite and non-negative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::Config(format!("cloud weights must sum to 1, got {sum}")));
        }
        if self.window_hours < 1 {
            return Err(Error::Config("cloud window must be at least one hour".into()));
        }
        if self.n_news == 0 || self.phrases_per_doc == 0 || self.max_phrases == 0 {
            return Err(Error::Config("cloud item counts must be at least 1".into()));
        }
        if !(self.font_min > 0.0 && self.font_min <= self.font_max) {
            return Err(Error::Config("cloud font range must satisfy 0 < min <= max".into()));
        }
        Ok(())
    }
}

/// A document with its extracted keyphrases, ready for cloud building.
#[derive(Debug, Clone)]
pub struct CloudDocument {
    pub id: String,
    pub channel: String,
    pub program: String,
    pub broadcast_time: DateTime<FixedOffset>,
    /// Zero-based slot of the story within its program.
    pub position_in_program: u32,
    pub topic: Option<String>,
    /// Ranked keyphrases, best first.
    pub keyphrases: Vec<RankedKeyphrase>,
}

impl CloudDocument {
    pub fn from_news(doc: &crate::corpus::NewsDocument, keyphrases: Vec<RankedKeyphrase>) -> Self {
        CloudDocument {
            id: doc.id.clone(),
            channel: doc.channel.clone(),
            program: doc.program.clone(),
            broadcast_time: doc.broadcast_time,
            position_in_program: doc.position_in_program,
            topic: doc.topic.clone(),
            keyphrases,
        }
    }
}

fn minmax_norm(value: f64, min: f64, max: f64) -> f64 {
    if max > min {
        (value - min) / (max - min)
    } else {
        0.0
    }
}

fn top_normalized(doc: &CloudDocument, limit: usize) -> HashSet<&str> {
    doc.keyphrases.iter().take(limit).map(|k| k.normalized.as_str()).collect()
}

/// Indices of the documents the cloud draws from: everything inside
/// `[now - window, now]` (both ends inclusive), restricted to `topic`
/// when one is given, scored and cut to the top `n_news`. Ties go to the
/// newer document, then the smaller id.
pub fn select_top_news(
    docs: &[CloudDocument],
    now: DateTime<FixedOffset>,
    topic: Option<&str>,
    config: &CloudConfig,
) -> Vec<usize> {
    let window_start = now - Duration::hours(config.window_hours);
    let in_window: Vec<usize> = (0..docs.len())
        .filter(|&i| docs[i].broadcast_time >= window_start && docs[i].broadcast_time <= now)
        .filter(|&i| topic.is_none_or(|t| docs[i].topic.as_deref() == Some(t)))
        .collect();
    if in_window.is_empty() {
        return Vec::new();
    }

    let stamps: Vec<f64> = in_window.iter().map(|&i| docs[i].broadcast_time.timestamp() as f64).collect();
    let t_min = stamps.iter().copied().fold(f64::INFINITY, f64::min);
    let t_max = stamps.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    // Last slot per (channel, program) among in-window documents.
    let mut max_position: HashMap<(&str, &str), u32> = HashMap::new();
    for &i in &in_window {
        let doc = &docs[i];
        let entry = max_position.entry((doc.channel.as_str(), doc.program.as_str())).or_insert(0);
        *entry = (*entry).max(doc.position_in_program);
    }

    // Other in-window documents sharing enough keyphrases.
    let phrase_sets: Vec<HashSet<&str>> =
        in_window.iter().map(|&i| top_normalized(&docs[i], config.phrases_per_doc)).collect();
    let duplication: Vec<f64> = (0..in_window.len())
        .map(|a| {
            (0..in_window.len())
                .filter(|&b| {
                    b != a
                        && phrase_sets[a].intersection(&phrase_sets[b]).count()
                            >= config.min_shared_keyphrases
                })
                .count() as f64
        })
        .collect();
    let d_min = duplication.iter().copied().fold(f64::INFINITY, f64::min);
    let d_max = duplication.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut scored: Vec<(f64, usize)> = in_window
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let doc = &docs[i];
            let recency = minmax_norm(stamps[k], t_min, t_max);
            let last_slot = max_position[&(doc.channel.as_str(), doc.program.as_str())];
            let position = if last_slot > 0 {
                doc.position_in_program as f64 / last_slot as f64
            } else {
                0.0
            };
            let dup = minmax_norm(duplication[k], d_min, d_max);
            let score = config.recency_weight * recency
                + config.position_weight * (1.0 - position)
                + config.duplication_weight * dup;
            (score, i)
        })
        .collect();
    scored.sort_by(|(sa, a), (sb, b)| {
        sb.total_cmp(sa)
            .then_with(|| docs[*b].broadcast_time.cmp(&docs[*a].broadcast_time))
            .then_with(|| docs[*a].id.cmp(&docs[*b].id))
    });
    scored.into_iter().take(config.n_news).map(|(_, i)| i).collect()
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CloudEntry {
    /// Display form: the surface from the first selected document that
    /// contributed the phrase.
    #[serde(rename = "phrase")]
    pub surface: String,
    #[serde(skip)]
    pub normalized: String,
    /// Summed term frequency across the contributing documents.
    pub count: u32,
    /// Contributing documents, in selection order.
    pub doc_ids: Vec<String>,
}

/// Pools the selected documents' top keyphrases and keeps the heaviest
/// `max_phrases`, heaviest first, ties broken by normalized form.
pub fn build_cloud(docs: &[CloudDocument], selected: &[usize], config: &CloudConfig) -> Vec<CloudEntry> {
    let mut order: Vec<String> = Vec::new();
    let mut pooled: HashMap<String, CloudEntry> = HashMap::new();
    for &i in selected {
        for phrase in docs[i].keyphrases.iter().take(config.phrases_per_doc) {
            match pooled.get_mut(&phrase.normalized) {
                Some(entry) => {
                    entry.count += phrase.tf;
                    entry.doc_ids.push(docs[i].id.clone());
                }
                None => {
                    order.push(phrase.normalized.clone());
                    pooled.insert(
                        phrase.normalized.clone(),
                        CloudEntry {
                            surface: phrase.surface.clone(),
                            normalized: phrase.normalized.clone(),
                            count: phrase.tf,
                            doc_ids: vec![docs[i].id.clone()],
                        },
                    );
                }
            }
        }
    }
    let mut entries: Vec<CloudEntry> =
        order.into_iter().map(|n| pooled.remove(&n).expect("pooled entry")).collect();
    entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.normalized.cmp(&b.normalized)));
    entries.truncate(config.max_phrases);
    entries
}

/// A finished cloud, ready to render or export.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TagCloud {
    pub generated_at: DateTime<FixedOffset>,
    pub topic: Option<String>,
    pub entries: Vec<CloudEntry>,
}

impl TagCloud {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cloud serializes")
    }
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

const CANVAS_W: f64 = 960.0;
const CANVAS_H: f64 = 560.0;
/// Sunflower-seed angle; successive placement candidates spiral outward.
const GOLDEN_ANGLE: f64 = 2.399963229728653;

struct Rect {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

fn overlaps(a: &Rect, b: &Rect, margin: f64) -> bool {
    a.x - margin < b.x + b.w && b.x - margin < a.x + a.w && a.y - margin < b.y + b.h
        && b.y - margin < a.y + a.h
}

/// Self-contained HTML page with an SVG cloud. Placement walks a
/// sunflower spiral outward from the center until a phrase's box stops
/// colliding with the ones already placed; no randomness anywhere, so
/// the output is a pure function of the cloud and config.
pub fn render_cloud(cloud: &TagCloud, config: &CloudConfig) -> String {
    const PALETTE: [&str; 8] =
        ["#1f6fb4", "#c02d2d", "#2c8a4b", "#8a55b0", "#d07622", "#1a97a6", "#7a5648", "#b0508f"];

    let entries = &cloud.entries;
    let mut html = String::new();
    html.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    html.push_str("<title>News keyphrase cloud</title>\n<style>\n");
    html.push_str("body { font-family: sans-serif; margin: 2em; color: #222; }\n");
    html.push_str("svg { border: 1px solid #ccc; background: #fdfdfc; }\n");
    html.push_str(".meta { color: #666; font-size: 0.9em; }\n</style>\n</head>\n<body>\n");
    match &cloud.topic {
        Some(topic) => html.push_str(&format!(
            "<h1>News keyphrase cloud — {}</h1>\n",
            xml_escape(topic)
        )),
        None => html.push_str("<h1>News keyphrase cloud</h1>\n"),
    }
    html.push_str(&format!(
        "<p class=\"meta\">Window: {} hours ending {}</p>\n",
        config.window_hours,
        xml_escape(&cloud.generated_at.to_rfc3339())
    ));

    if entries.is_empty() {
        html.push_str(&format!(
            "<p class=\"empty\">No news items in the last {} hours.</p>\n",
            config.window_hours
        ));
        html.push_str("</body>\n</html>\n");
        return html;
    }

    let counts: Vec<f64> = entries.iter().map(|e| e.count as f64).collect();
    let c_min = counts.iter().copied().fold(f64::INFINITY, f64::min);
    let c_max = counts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let font_of = |count: f64| {
        if c_max > c_min {
            config.font_min + (count - c_min) / (c_max - c_min) * (config.font_max - config.font_min)
        } else {
            config.font_max
        }
    };

    html.push_str(&format!(
        "<svg width=\"{CANVAS_W}\" height=\"{CANVAS_H}\" viewBox=\"0 0 {CANVAS_W} {CANVAS_H}\" xmlns=\"http://www.w3.org/2000/svg\">\n"
    ));

    let mut placed: Vec<Rect> = Vec::new();
    for (i, entry) in entries.iter().enumerate() {
        let label = format!("{} ({})", entry.surface, entry.count);
        let font = font_of(entry.count as f64);
        // Crude glyph metrics; only collision spacing depends on them.
        let w = label.chars().count() as f64 * font * 0.58;
        let h = font * 1.15;

        let (mut cx, mut cy) = (CANVAS_W / 2.0, CANVAS_H / 2.0);
        for t in 0..4000 {
            let r = 6.0 * (t as f64).sqrt();
            let theta = t as f64 * GOLDEN_ANGLE;
            cx = CANVAS_W / 2.0 + r * theta.cos();
            cy = CANVAS_H / 2.0 + r * theta.sin() * 0.62; // squash to the canvas shape
            let rect = Rect { x: cx - w / 2.0, y: cy - h / 2.0, w, h };
            if placed.iter().all(|p| !overlaps(p, &rect, 3.0)) {
                break;
            }
        }
        placed.push(Rect { x: cx - w / 2.0, y: cy - h / 2.0, w, h });
        html.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"{:.1}\" fill=\"{}\">{}</text>\n",
            cx,
            cy + h * 0.3,
            font,
            PALETTE[i % PALETTE.len()],
            xml_escape(&label)
        ));
    }
    html.push_str("</svg>\n</body>\n</html>\n");
    html
}
