use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use endofix::corpus::{fixture_text, generate, CorpusParams};
use endofix::graphmap::{induced_endomorphism, marking_at_fixed_vertex, NamedSelfMap};
use endofix::nielsen::analyze_endomorphism_power;
use endofix::report::{
    endo_report, graphmap_report, render_text, to_canonical_json, ReportOptions,
    DEFAULT_RANK_CUTOFF,
};
use endofix::stabletree::{stable_analysis, DEFAULT_KMAX, DEFAULT_WINDOW};
use endofix::stallings::{is_injective, is_surjective};
use endofix::traintrack::{iwip_certificate, IwipCertificate};
use endofix::words::Endomorphism;
use endofix::Error;

#[derive(Parser)]
#[command(name = "endofix", version, about = "Fixed point indices of free-group endomorphisms")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Endo,
    Graphmap,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Theorem {
    /// per-class bound: index <= chr
    JwzA,
    /// total bound: jwz_sum >= 2 chi
    JwzB,
    /// index = 1 - rank - a on rank-certified classes
    Zz2,
    /// outer index bound: ind <= n - 1
    Bound,
    /// stable graph: 2 ind(power) <= geo_index = 2n - 2
    Main2,
    /// branch periodicity iff attainment of 2 ind = 2n - 2
    Main3,
}

impl Theorem {
    fn name(self) -> &'static str {
        match self {
            Theorem::JwzA => "jwz-a",
            Theorem::JwzB => "jwz-b",
            Theorem::Zz2 => "zz2",
            Theorem::Bound => "bound",
            Theorem::Main2 => "main2",
            Theorem::Main3 => "main3",
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Analyze one endomorphism or graph selfmap and print a report
    Analyze {
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long = "kmax", default_value_t = DEFAULT_KMAX)]
        k_max: usize,
        #[arg(long = "rank-cutoff", default_value_t = DEFAULT_RANK_CUTOFF)]
        rank_cutoff: usize,
        #[arg(long = "path-cutoff")]
        path_cutoff: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check one theorem against fixtures or a generated corpus
    Verify {
        #[arg(value_enum)]
        theorem: Theorem,
        /// fixture files; defaults to ENDOFIX_FIXTURES, then a corpus
        inputs: Vec<PathBuf>,
        #[arg(long = "kmax", default_value_t = DEFAULT_KMAX)]
        k_max: usize,
        #[arg(long = "rank-cutoff", default_value_t = DEFAULT_RANK_CUTOFF)]
        rank_cutoff: usize,
        #[arg(long = "path-cutoff")]
        path_cutoff: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        /// maximum rank of generated corpus maps
        #[arg(long, default_value_t = 3)]
        rank: usize,
        #[arg(long = "max-image-len", default_value_t = 6)]
        max_image_len: usize,
    },
    /// Write a deterministic corpus of injective endomorphisms
    Corpus {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long = "max-image-len", default_value_t = 6)]
        max_image_len: usize,
        #[arg(long, default_value = "corpus")]
        out: PathBuf,
    },
}

/// 0 pass, 1 hypothesis violation, 2 check failure, 3 parse error.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } => 3,
        Error::Hypothesis(_) | Error::NotInjective | Error::SurjectiveInput => 1,
        _ => 2,
    }
}

fn resolve(path: &Path) -> PathBuf {
    if path.exists() {
        return path.to_path_buf();
    }
    if let Ok(dir) = std::env::var("ENDOFIX_FIXTURES") {
        let cand = Path::new(&dir).join(path);
        if cand.exists() {
            return cand;
        }
    }
    path.to_path_buf()
}

fn read_input(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(resolve(path))
        .map_err(|e| Error::Parse { line: 0, msg: format!("{}: {e}", path.display()) })
}

fn infer_mode(path: &Path, flag: Option<Mode>) -> Result<Mode, Error> {
    if let Some(m) = flag {
        return Ok(m);
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("endo") => Ok(Mode::Endo),
        Some("gmap") => Ok(Mode::Graphmap),
        other => Err(Error::Parse {
            line: 0,
            msg: format!(
                "cannot infer mode from extension {other:?}; pass --mode endo or --mode graphmap"
            ),
        }),
    }
}

fn print_report(v: &Value, format: Format) {
    match format {
        Format::Json => print!("{}", to_canonical_json(v)),
        Format::Text => print!("{}", render_text(v)),
    }
}

fn cmd_analyze(
    input: &Path,
    mode: Option<Mode>,
    opts: &ReportOptions,
    format: Format,
) -> Result<(), Error> {
    let text = read_input(input)?;
    let name = input.display().to_string();
    let report = match infer_mode(input, mode)? {
        Mode::Endo => endo_report(&Endomorphism::parse_text(&text)?, &name, opts)?,
        Mode::Graphmap => graphmap_report(&NamedSelfMap::parse_text(&text)?, &name, opts)?,
    };
    print_report(&report, format);
    Ok(())
}

struct Instance {
    name: String,
    phi: Endomorphism,
}

fn load_instances(
    inputs: &[PathBuf],
    seed: u64,
    count: usize,
    max_rank: usize,
    max_image_len: usize,
) -> Result<(Vec<Instance>, String), Error> {
    if !inputs.is_empty() {
        let mut out = Vec::new();
        for p in inputs {
            let text = read_input(p)?;
            let phi = match p.extension().and_then(|e| e.to_str()) {
                Some("gmap") => {
                    let nm = NamedSelfMap::parse_text(&text)?;
                    let m = marking_at_fixed_vertex(&nm.map)?;
                    induced_endomorphism(&nm.map, &m)?
                }
                _ => Endomorphism::parse_text(&text)?,
            };
            out.push(Instance { name: p.display().to_string(), phi });
        }
        return Ok((out, "files".into()));
    }
    if let Ok(dir) = std::env::var("ENDOFIX_FIXTURES") {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(|e| Error::Parse { line: 0, msg: format!("{dir}: {e}") })?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("endo"))
            .collect();
        paths.sort();
        if !paths.is_empty() {
            let mut out = Vec::new();
            for p in &paths {
                let text = read_input(p)?;
                out.push(Instance {
                    name: p.display().to_string(),
                    phi: Endomorphism::parse_text(&text)?,
                });
            }
            return Ok((out, format!("fixture directory {dir}")));
        }
    }
    let phis = endofix::corpus::generate_mixed(seed, count, max_rank, max_image_len);
    let out = phis
        .into_iter()
        .enumerate()
        .map(|(i, phi)| Instance { name: format!("corpus[{i}]"), phi })
        .collect();
    Ok((out, format!("generated corpus (seed {seed}, count {count}, rank <= {max_rank}, image length <= {max_image_len})")))
}

struct Outcome {
    name: String,
    status: &'static str, // pass | fail | skip
    detail: String,
    /// reproducible dump on failure
    dump: Option<String>,
}

/// Rose-side powers checked per instance; deep powers of high ranks
/// are cut off to keep word searches affordable.
fn verify_powers(rank: usize, k_max: usize) -> usize {
    if rank <= 2 {
        k_max.min(3)
    } else {
        k_max.min(2)
    }
}

fn check_instance(
    theorem: Theorem,
    inst: &Instance,
    opts: &ReportOptions,
) -> Result<Outcome, Error> {
    let phi = &inst.phi;
    let name = inst.name.clone();
    let fail = |detail: String| Outcome {
        name: name.clone(),
        status: "fail",
        detail,
        dump: Some(phi.to_text()),
    };
    let pass = |detail: String| Outcome { name: name.clone(), status: "pass", detail, dump: None };
    let skip = |detail: String| Outcome { name: name.clone(), status: "skip", detail, dump: None };

    match theorem {
        Theorem::JwzA | Theorem::JwzB | Theorem::Zz2 | Theorem::Bound => {
            let powers =
                if theorem == Theorem::Zz2 { 1 } else { verify_powers(phi.rank(), opts.k_max) };
            let mut uncertified = 0usize;
            for k in 1..=powers {
                let na = analyze_endomorphism_power(phi, k, opts.rank_cutoff, opts.path_cutoff)?;
                match theorem {
                    Theorem::JwzA => {
                        for c in &na.classes {
                            if c.index > c.chr {
                                return Ok(fail(format!(
                                    "power {k}, class at {}: index {} > chr {}",
                                    c.location, c.index, c.chr
                                )));
                            }
                        }
                    }
                    Theorem::JwzB => {
                        if na.jwz_sum < na.two_chi {
                            return Ok(fail(format!(
                                "power {k}: jwz_sum {} < 2 chi {}",
                                na.jwz_sum, na.two_chi
                            )));
                        }
                    }
                    Theorem::Zz2 => {
                        for c in &na.classes {
                            if !c.rank_certified {
                                uncertified += 1;
                                continue;
                            }
                            if c.index != c.ichr {
                                return Ok(fail(format!(
                                    "class at {}: index {} != ichr {} (rank {}, a {})",
                                    c.location, c.index, c.ichr, c.rank, c.a
                                )));
                            }
                        }
                    }
                    Theorem::Bound => {
                        if na.outer_index2 > na.bound2 {
                            return Ok(fail(format!(
                                "power {k}: 2 ind {} > 2(n-1) = {}",
                                na.outer_index2, na.bound2
                            )));
                        }
                    }
                    _ => unreachable!(),
                }
            }
            let mut detail = format!("checked powers 1..={powers}");
            if theorem == Theorem::Zz2 && uncertified > 0 {
                detail = format!("{detail}; {uncertified} cutoff-limited class(es) excluded");
            }
            Ok(pass(detail))
        }
        Theorem::Main2 | Theorem::Main3 => {
            if is_surjective(phi) {
                return Ok(skip("surjective (automorphism case)".into()));
            }
            if theorem == Theorem::Main3 {
                let (f, _m) = endofix::graphmap::rose_representative(phi);
                match iwip_certificate(&f)? {
                    IwipCertificate::Certified { .. } => {}
                    other => {
                        return Ok(skip(format!("iwip certificate not certified: {other:?}")))
                    }
                }
            }
            match stable_analysis(phi, opts.k_max, opts.window, opts.rank_cutoff) {
                Ok(sa) => match theorem {
                    Theorem::Main2 => Ok(pass(format!(
                        "geo_index {} = 2n-2; 2 ind by power {:?}",
                        sa.geo_index, sa.outer_index2_by_power
                    ))),
                    _ => {
                        if sa.verdict.starts_with("disagree") {
                            Ok(fail(sa.verdict))
                        } else {
                            Ok(pass(sa.verdict))
                        }
                    }
                },
                Err(Error::StableGraph(msg)) => Ok(skip(format!("not stabilized: {msg}"))),
                Err(Error::Hypothesis(msg)) => Ok(fail(msg)),
                Err(e) => Err(e),
            }
        }
    }
}

fn cmd_verify(
    theorem: Theorem,
    inputs: &[PathBuf],
    opts: &ReportOptions,
    format: Format,
    seed: u64,
    count: usize,
    rank: usize,
    max_image_len: usize,
) -> Result<bool, Error> {
    let (instances, source) = load_instances(inputs, seed, count, rank, max_image_len)?;
    let mut results = Vec::new();
    let mut outcomes = Vec::new();
    for inst in &instances {
        let o = check_instance(theorem, inst, opts)?;
        results.push(json!({
            "name": o.name,
            "status": o.status,
            "detail": o.detail,
            "counterexample": o.dump,
        }));
        outcomes.push(o);
    }
    let passed = outcomes.iter().filter(|o| o.status == "pass").count();
    let failed = outcomes.iter().filter(|o| o.status == "fail").count();
    let skipped = outcomes.iter().filter(|o| o.status == "skip").count();
    let report = json!({
        "tool": "endofix",
        "version": env!("CARGO_PKG_VERSION"),
        "theorem": theorem.name(),
        "source": source,
        "k_max": opts.k_max,
        "rank_cutoff": opts.rank_cutoff,
        "window": opts.window,
        "seed": seed,
        "results": results,
        "summary": { "total": outcomes.len(), "passed": passed, "failed": failed, "skipped": skipped },
    });
    match format {
        Format::Json => print!("{}", to_canonical_json(&report)),
        Format::Text => {
            println!("verify {} over {source}", theorem.name());
            for o in &outcomes {
                println!("  {}: {} ({})", o.status, o.name, o.detail);
                if let Some(d) = &o.dump {
                    for line in d.lines() {
                        println!("    | {line}");
                    }
                }
            }
            println!("summary: {} total, {passed} passed, {failed} failed, {skipped} skipped", outcomes.len());
        }
    }
    Ok(failed == 0)
}

fn cmd_corpus(
    seed: u64,
    count: usize,
    rank: usize,
    max_image_len: usize,
    out: &Path,
) -> Result<(), Error> {
    let params = CorpusParams { seed, count, rank, max_image_len };
    let phis = generate(&params);
    std::fs::create_dir_all(out)
        .map_err(|e| Error::Invalid(format!("{}: {e}", out.display())))?;
    let mut written = Vec::new();
    for (i, phi) in phis.iter().enumerate() {
        debug_assert!(is_injective(phi));
        let path = out.join(format!("c{seed}_{i:04}.endo"));
        std::fs::write(&path, fixture_text(phi, &params, i))
            .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        written.push(path.display().to_string());
    }
    print!(
        "{}",
        to_canonical_json(&json!({
            "seed": seed,
            "count": count,
            "rank": rank,
            "max_image_len": max_image_len,
            "written": written,
        }))
    );
    Ok(())
}

fn run() -> Result<bool, Error> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Analyze { input, mode, k_max, rank_cutoff, path_cutoff, window, format, seed } => {
            let opts = ReportOptions { k_max, rank_cutoff, path_cutoff, window, seed };
            cmd_analyze(&input, mode, &opts, format)?;
            Ok(true)
        }
        Cmd::Verify {
            theorem,
            inputs,
            k_max,
            rank_cutoff,
            path_cutoff,
            window,
            format,
            seed,
            count,
            rank,
            max_image_len,
        } => {
            let opts =
                ReportOptions { k_max, rank_cutoff, path_cutoff, window, seed: Some(seed) };
            cmd_verify(theorem, &inputs, &opts, format, seed, count, rank, max_image_len)
        }
        Cmd::Corpus { seed, count, rank, max_image_len, out } => {
            cmd_corpus(seed, count, rank, max_image_len, &out)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
