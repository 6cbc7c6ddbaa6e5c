//! Analysis reports. JSON is the canonical form (serde_json objects
//! keep sorted keys, so equal configs give byte-identical output);
//! the text rendering is derived from the JSON value.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graphmap::{
    induced_endomorphism, marking_at_fixed_vertex, rose_representative, GraphSelfMap, Marking,
    NamedSelfMap,
};
use crate::nielsen::{analyze, analyze_endomorphism_power, NielsenAnalysis};
use crate::stabletree::{stable_analysis, StableAnalysis};
use crate::stallings::{is_injective, is_surjective};
use crate::traintrack::{
    iwip_certificate, pf_data, train_track_obstruction, transition_matrix, IwipCertificate,
    PF_MAX_ITER, PF_TOLERANCE,
};
use crate::words::Endomorphism;

pub use crate::nielsen::DEFAULT_RANK_CUTOFF;

#[derive(Clone, Debug)]
pub struct ReportOptions {
    pub k_max: usize,
    pub rank_cutoff: usize,
    pub path_cutoff: Option<usize>,
    pub window: usize,
    pub seed: Option<u64>,
}

impl Default for ReportOptions {
    fn default() -> ReportOptions {
        ReportOptions {
            k_max: crate::stabletree::DEFAULT_KMAX,
            rank_cutoff: DEFAULT_RANK_CUTOFF,
            path_cutoff: None,
            window: crate::stabletree::DEFAULT_WINDOW,
            seed: None,
        }
    }
}

fn config_json(opts: &ReportOptions, input: &str, mode: &str) -> Value {
    json!({
        "tool": "endofix",
        "version": env!("CARGO_PKG_VERSION"),
        "input": input,
        "mode": mode,
        "k_max": opts.k_max,
        "rank_cutoff": opts.rank_cutoff,
        "path_cutoff": opts.path_cutoff,
        "window": opts.window,
        "seed": opts.seed,
        "pf_tolerance": PF_TOLERANCE,
        "pf_max_iterations": PF_MAX_ITER,
    })
}

fn class_json(na: &NielsenAnalysis) -> Vec<Value> {
    na.classes
        .iter()
        .map(|c| {
            json!({
                "location": c.location,
                "index": c.index,
                "twist": c.twist.to_string(),
                "rank": c.rank,
                "rank_certified": c.rank_certified,
                "rank_cutoff": c.rank_cutoff,
                "a": c.a,
                "a_inversion": c.a_inversion,
                "chr": c.chr,
                "ichr": c.ichr,
            })
        })
        .collect()
}

fn totals_json(na: &NielsenAnalysis) -> Value {
    json!({
        "lefschetz": na.lefschetz,
        "lefschetz_matches": na.lefschetz_matches,
        "separation_certified": na.separation_certified,
        "jwz_sum": na.jwz_sum,
        "two_chi": na.two_chi,
        "outer_index": na.outer_index2 as f64 / 2.0,
        "outer_index2": na.outer_index2,
        "bound_n_minus_1": (na.bound2 as f64) / 2.0,
        "bound2": na.bound2,
    })
}

fn matrix_section(f: &GraphSelfMap) -> Value {
    let mat = transition_matrix(f);
    let pf = match pf_data(&mat) {
        Ok(pf) => json!({
            "lambda": pf.lambda,
            "eigenvector": pf.eigenvector,
            "iterations": pf.iterations,
            "tolerance": PF_TOLERANCE,
            "max_iterations": PF_MAX_ITER,
            "primitive": pf.primitive,
            "primitivity_witness": pf.primitivity_witness,
        }),
        Err(Error::ReducibleMatrix(sub)) => json!({ "reducible_on_edges": sub }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let tt = match train_track_obstruction(f) {
        Ok(None) => json!({ "train_track": true }),
        Ok(Some(w)) => json!({
            "train_track": false,
            "illegal_turn": {
                "edge": w.edge,
                "position": w.position,
                "darts": [w.darts.0, w.darts.1],
                "collide_at": w.collide_at,
            },
        }),
        Err(e) => json!({ "train_track": Value::Null, "error": e.to_string() }),
    };
    let iwip = match iwip_certificate(f) {
        Ok(IwipCertificate::Certified { lambda, primitivity_witness }) => json!({
            "status": "certified",
            "lambda": lambda,
            "primitivity_witness": primitivity_witness,
        }),
        Ok(IwipCertificate::Refuted { invariant_edges, betti }) => json!({
            "status": "refuted",
            "invariant_edges": invariant_edges,
            "betti": betti,
        }),
        Ok(IwipCertificate::Inconclusive { reason }) => json!({
            "status": "inconclusive",
            "reason": reason,
        }),
        Err(e) => json!({ "status": "error", "reason": e.to_string() }),
    };
    json!({ "transition_matrix": mat, "pf": pf, "train_track_verdict": tt, "iwip": iwip })
}

fn stable_json(sa: &StableAnalysis) -> Value {
    let g = &sa.stable.suppressed.graph;
    let edges: Vec<Value> = (0..g.n_edges())
        .map(|e| {
            let (o, t) = g.endpoints(e);
            json!([o, t])
        })
        .collect();
    let h_edge_images: Vec<String> = (0..sa.h.graph.n_edges())
        .map(|e| {
            let img = sa.h.edge_image(e);
            if img.is_empty() {
                "1".to_string()
            } else {
                img.iter()
                    .map(|&d| {
                        if d % 2 == 0 {
                            format!("e{}", crate::graphmap::edge_of(d))
                        } else {
                            format!("~e{}", crate::graphmap::edge_of(d))
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            }
        })
        .collect();
    let branch_points: Vec<Value> = sa
        .branch_points
        .iter()
        .map(|bp| {
            json!({
                "vertex": bp.vertex,
                "valence": bp.valence,
                "periodic": bp.periodic,
                "period": bp.period,
            })
        })
        .collect();
    let by_power: BTreeMap<usize, f64> =
        sa.outer_index2_by_power.iter().map(|&(k, v)| (k, v as f64 / 2.0)).collect();
    let by_power2: BTreeMap<usize, i64> = sa.outer_index2_by_power.iter().cloned().collect();
    json!({
        "k0": sa.stable.k0,
        "window": sa.stable.window,
        "graph": {
            "vertices": g.n_vertices(),
            "edges": edges,
            "base": sa.stable.suppressed.base,
            "core": sa.stable.core.to_json(),
        },
        "h_vertex_map": sa.h.vertex_map(),
        "h_edge_images": h_edge_images,
        "branch_points": branch_points,
        "geo_index": sa.geo_index,
        "outer_index_by_power": by_power,
        "outer_index2_by_power": by_power2,
        "all_branch_periodic": sa.all_branch_periodic,
        "attained_at": sa.attained_at,
        "verdict": sa.verdict,
        "endo_cross_check": sa.endo_cross_check,
    })
}

fn power_section(phi: &Endomorphism, opts: &ReportOptions) -> Result<Value> {
    let cap = crate::nielsen::affordable_power_cap(phi, opts.k_max, opts.rank_cutoff);
    let mut by_power = BTreeMap::new();
    let mut by_power2 = BTreeMap::new();
    for k in 1..=cap.max(1) {
        let na = analyze_endomorphism_power(phi, k, opts.rank_cutoff, opts.path_cutoff)?;
        by_power.insert(k, na.outer_index2 as f64 / 2.0);
        by_power2.insert(k, na.outer_index2);
    }
    Ok(json!({
        "powers_computed": cap.max(1),
        "outer_index_by_power": by_power,
        "outer_index2_by_power": by_power2,
    }))
}

fn stable_section(phi: &Endomorphism, opts: &ReportOptions) -> Result<Value> {
    if !is_injective(phi) {
        return Ok(json!({ "status": "not_applicable", "reason": "not injective" }));
    }
    if is_surjective(phi) {
        return Ok(json!({ "status": "not_applicable", "reason": "surjective (automorphism case)" }));
    }
    match stable_analysis(phi, opts.k_max, opts.window, opts.rank_cutoff) {
        Ok(sa) => {
            let mut v = stable_json(&sa);
            v["status"] = json!("stabilized");
            Ok(v)
        }
        Err(Error::StableGraph(msg)) => Ok(json!({ "status": "not_stabilized", "reason": msg })),
        Err(e) => Err(e),
    }
}

fn assemble(
    config: Value,
    f: &GraphSelfMap,
    m: &Marking,
    phi: &Endomorphism,
    opts: &ReportOptions,
) -> Result<Value> {
    let path_cutoff =
        opts.path_cutoff.unwrap_or_else(|| crate::nielsen::default_path_cutoff(f));
    let na = analyze(f, m, opts.rank_cutoff, path_cutoff)?;
    let mut report = json!({
        "config": config,
        "rank": phi.rank(),
        "injective": na.injective,
        "surjective": na.surjective,
        "classes": class_json(&na),
        "totals": totals_json(&na),
        "powers": power_section(phi, opts)?,
        "stable_graph": stable_section(phi, opts)?,
    });
    let ms = matrix_section(f);
    for key in ["transition_matrix", "pf", "train_track_verdict", "iwip"] {
        report[key] = ms[key].clone();
    }
    Ok(report)
}

/// Full report for an endomorphism, analyzed on its rose representative.
pub fn endo_report(phi: &Endomorphism, input: &str, opts: &ReportOptions) -> Result<Value> {
    let (f, m) = rose_representative(phi);
    assemble(config_json(opts, input, "endo"), &f, &m, phi, opts)
}

/// Full report for a marked graph selfmap; the class analysis runs on
/// the map itself, the endomorphism sections on its induced outer class.
pub fn graphmap_report(nm: &NamedSelfMap, input: &str, opts: &ReportOptions) -> Result<Value> {
    let f = &nm.map;
    let m = marking_at_fixed_vertex(f)?;
    let phi = induced_endomorphism(f, &m)?;
    assemble(config_json(opts, input, "graphmap"), f, &m, &phi, opts)
}

/// Canonical serialized form: compact JSON with sorted keys.
pub fn to_canonical_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn fmt_scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".to_string(),
        other => other.to_string(),
    }
}

/// Text rendering, derived purely from the JSON value.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    let push = |out: &mut String, s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    if let Some(cfg) = v.get("config") {
        push(&mut out, format!(
            "endofix {} report for {} (mode {})",
            fmt_scalar(&cfg["version"]),
            fmt_scalar(&cfg["input"]),
            fmt_scalar(&cfg["mode"]),
        ));
        push(&mut out, format!(
            "config: k_max {}, rank_cutoff {}, path_cutoff {}, window {}, seed {}",
            fmt_scalar(&cfg["k_max"]),
            fmt_scalar(&cfg["rank_cutoff"]),
            fmt_scalar(&cfg["path_cutoff"]),
            fmt_scalar(&cfg["window"]),
            fmt_scalar(&cfg["seed"]),
        ));
    }
    push(&mut out, format!(
        "rank {}; injective: {}; surjective: {}",
        fmt_scalar(&v["rank"]),
        fmt_scalar(&v["injective"]),
        fmt_scalar(&v["surjective"]),
    ));
    if let Some(rows) = v["transition_matrix"].as_array() {
        push(&mut out, "transition matrix:".into());
        for row in rows {
            push(&mut out, format!("  {row}"));
        }
    }
    let pf = &v["pf"];
    if pf.get("lambda").is_some() {
        push(&mut out, format!(
            "pf: lambda {} (primitive: {}, witness {}, {} iterations, tolerance {})",
            fmt_scalar(&pf["lambda"]),
            fmt_scalar(&pf["primitive"]),
            fmt_scalar(&pf["primitivity_witness"]),
            fmt_scalar(&pf["iterations"]),
            fmt_scalar(&pf["tolerance"]),
        ));
    } else if pf.get("reducible_on_edges").is_some() {
        push(&mut out, format!("pf: reducible on edges {}", pf["reducible_on_edges"]));
    }
    let tt = &v["train_track_verdict"];
    if !tt.is_null() {
        if tt["train_track"] == json!(true) {
            push(&mut out, "train track: yes".into());
        } else if let Some(w) = tt.get("illegal_turn") {
            push(&mut out, format!(
                "train track: no (illegal turn {} in image of edge {}, collision at iterate {})",
                w["darts"], fmt_scalar(&w["edge"]), fmt_scalar(&w["collide_at"]),
            ));
        }
    }
    if let Some(iwip) = v.get("iwip") {
        let status = fmt_scalar(&iwip["status"]);
        let detail = match status.as_str() {
            "certified" => format!(
                " (lambda {}, primitivity witness {})",
                fmt_scalar(&iwip["lambda"]),
                fmt_scalar(&iwip["primitivity_witness"])
            ),
            "refuted" => format!(
                " (invariant edges {}, betti {})",
                iwip["invariant_edges"],
                fmt_scalar(&iwip["betti"])
            ),
            _ => format!(" ({})", fmt_scalar(&iwip["reason"])),
        };
        push(&mut out, format!("iwip: {status}{detail}"));
    }
    if let Some(classes) = v["classes"].as_array() {
        push(&mut out, format!("fixed point classes ({}):", classes.len()));
        for c in classes {
            push(&mut out, format!(
                "  {}: index {}, rank {}{} (cutoff {}), a {}, chr {}, ichr {}, twist {}",
                fmt_scalar(&c["location"]),
                fmt_scalar(&c["index"]),
                fmt_scalar(&c["rank"]),
                if c["rank_certified"] == json!(true) { "" } else { " (uncertified)" },
                fmt_scalar(&c["rank_cutoff"]),
                fmt_scalar(&c["a"]),
                fmt_scalar(&c["chr"]),
                fmt_scalar(&c["ichr"]),
                fmt_scalar(&c["twist"]),
            ));
        }
    }
    if let Some(t) = v.get("totals") {
        push(&mut out, format!(
            "lefschetz {} (matches class sum: {}); jwz_sum {} vs 2*chi {}; \
             outer index {} <= bound {}",
            fmt_scalar(&t["lefschetz"]),
            fmt_scalar(&t["lefschetz_matches"]),
            fmt_scalar(&t["jwz_sum"]),
            fmt_scalar(&t["two_chi"]),
            fmt_scalar(&t["outer_index"]),
            fmt_scalar(&t["bound_n_minus_1"]),
        ));
    }
    if let Some(p) = v.get("powers") {
        if let Some(map) = p["outer_index_by_power"].as_object() {
            let pairs: Vec<String> =
                map.iter().map(|(k, val)| format!("{k}: {}", fmt_scalar(val))).collect();
            push(&mut out, format!("outer index by power: {{{}}}", pairs.join(", ")));
        }
    }
    if let Some(sg) = v.get("stable_graph") {
        let status = fmt_scalar(&sg["status"]);
        match status.as_str() {
            "stabilized" => {
                push(&mut out, format!(
                    "stable graph: stabilized at k0 {} (window {}); {} vertices, {} edges; \
                     geo_index {}",
                    fmt_scalar(&sg["k0"]),
                    fmt_scalar(&sg["window"]),
                    fmt_scalar(&sg["graph"]["vertices"]),
                    sg["graph"]["edges"].as_array().map(|a| a.len()).unwrap_or(0),
                    fmt_scalar(&sg["geo_index"]),
                ));
                if let Some(bps) = sg["branch_points"].as_array() {
                    for bp in bps {
                        push(&mut out, format!(
                            "  branch point v{}: valence {}, periodic {}{}",
                            fmt_scalar(&bp["vertex"]),
                            fmt_scalar(&bp["valence"]),
                            fmt_scalar(&bp["periodic"]),
                            bp["period"].as_u64().map(|p| format!(" (period {p})")).unwrap_or_default(),
                        ));
                    }
                }
                if let Some(map) = sg["outer_index_by_power"].as_object() {
                    let pairs: Vec<String> =
                        map.iter().map(|(k, val)| format!("{k}: {}", fmt_scalar(val))).collect();
                    push(&mut out, format!("  stable outer index by power: {{{}}}", pairs.join(", ")));
                }
                push(&mut out, format!("  verdict: {}", fmt_scalar(&sg["verdict"])));
                push(&mut out, format!("  endomorphism cross-check: {}", fmt_scalar(&sg["endo_cross_check"])));
            }
            _ => push(&mut out, format!(
                "stable graph: {status} ({})",
                fmt_scalar(&sg["reason"]),
            )),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jiang() -> Endomorphism {
        Endomorphism::parse_text("rank: 2\na -> a\nb -> Bab\n").unwrap()
    }

    fn referee() -> Endomorphism {
        Endomorphism::parse_text("rank: 2\na -> ab\nb -> aBa\n").unwrap()
    }

    #[test]
    fn jiang_report_totals() {
        let opts = ReportOptions { k_max: 3, ..Default::default() };
        let r = endo_report(&jiang(), "jiang", &opts).unwrap();
        assert_eq!(r["totals"]["jwz_sum"], json!(-1));
        assert_eq!(r["totals"]["two_chi"], json!(-2));
        assert_eq!(r["totals"]["lefschetz_matches"], json!(true));
        assert_eq!(r["iwip"]["status"], json!("refuted"));
        assert_eq!(r["stable_graph"]["status"], json!("stabilized"));
        let text = render_text(&r);
        assert!(text.contains("jwz_sum -1 vs 2*chi -2"));
    }

    #[test]
    fn referee_report_is_deterministic() {
        let opts = ReportOptions { k_max: 4, ..Default::default() };
        let a = to_canonical_json(&endo_report(&referee(), "referee", &opts).unwrap());
        let b = to_canonical_json(&endo_report(&referee(), "referee", &opts).unwrap());
        assert_eq!(a, b);
        assert!(a.contains("\"lambda\""));
    }

    #[test]
    fn graphmap_report_on_identity_rose() {
        let phi = Endomorphism::identity(2);
        let (f, _m) = rose_representative(&phi);
        let nm = NamedSelfMap {
            map: f,
            vertex_names: vec!["v".into()],
            edge_names: vec!["a".into(), "b".into()],
        };
        let r = graphmap_report(&nm, "identity", &ReportOptions::default()).unwrap();
        assert_eq!(r["totals"]["lefschetz"], json!(-1));
        assert_eq!(r["surjective"], json!(true));
        assert_eq!(r["stable_graph"]["status"], json!("not_applicable"));
    }
}
