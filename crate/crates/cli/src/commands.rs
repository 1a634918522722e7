use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rauzy_core::dimension::{self, DimensionError, PipelineConfig};
use rauzy_core::rational::{self, format_rational, Rational};
use rauzy_core::{graph, io, markov, measure, suspension, verify};
use rauzy_core::{AcceleratedOutcome, SpecialSystem, StepOutcome, SystemError};
use serde_json::{json, Value};

use crate::{Failure, Format, GraphFormat, Output, Run, Suite, TailKind};

/// Version, command, seed and the flags that shape the result. Worker counts
/// are left out so output stays byte-identical across them.
fn provenance(command: &str, seed: Option<u64>, args: Value) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": seed,
        "args": args,
    })
}

/// Attaches `prov`, merging it into any provenance the body already carries.
fn json_out(mut body: Value, prov: Value) -> String {
    match (body.get_mut("provenance").and_then(Value::as_object_mut), prov) {
        (Some(existing), Value::Object(extra)) => existing.extend(extra),
        (_, prov) => body["provenance"] = prov,
    }
    format!("{}\n", serde_json::to_string_pretty(&body).expect("json values serialize"))
}

fn csv_header(prov: &Value) -> String {
    format!("# provenance: {prov}\n")
}

fn bad(msg: impl Into<String>) -> Failure {
    Failure::BadInput(msg.into())
}

fn positive<T: PartialOrd + Default>(name: &str, v: T) -> Result<(), Failure> {
    if v > T::default() {
        Ok(())
    } else {
        Err(bad(format!("--{name} must be positive")))
    }
}

fn parse_system(lengths: &[String]) -> Result<SpecialSystem, Failure> {
    let [a, b, c] = lengths else {
        return Err(bad(format!("expected three lengths p/q, got {}", lengths.len())));
    };
    let parse = |s: &String| rational::parse_rational(s).map_err(|e| bad(format!("{e} (lengths are exact p/q)")));
    SpecialSystem::new(parse(a)?, parse(b)?, parse(c)?).map_err(|e| match e {
        SystemError::TieEncountered => bad("TieEncountered: two lengths are equal"),
        e => bad(e.to_string()),
    })
}

fn exact(l: &[Rational; 3]) -> [String; 3] {
    l.each_ref().map(format_rational)
}

pub fn step(lengths: &[String], accelerated: bool, iters: u64, format: Format) -> Result<Output, Failure> {
    positive("iters", iters)?;
    let mut s = parse_system(lengths)?;
    let mut records = Vec::new();
    for i in 1..=iters {
        let rec = if accelerated {
            match s.accelerated_step() {
                AcceleratedOutcome::Continue(st) => {
                    let r = json!({
                        "iteration": i, "outcome": "continue", "winner": st.winner, "n": st.n,
                        "lengths": exact(st.system.lengths().as_array()), "order": st.system.order(),
                        "relative_order": st.relative_order, "matrix": st.matrix,
                    });
                    s = st.system;
                    r
                }
                AcceleratedOutcome::HoleAfter { k } => json!({ "iteration": i, "outcome": "hole", "n": k }),
                AcceleratedOutcome::TieEncountered => json!({ "iteration": i, "outcome": "tie" }),
            }
        } else {
            match s.rauzy_step() {
                StepOutcome::Continue(st) => {
                    let r = json!({
                        "iteration": i, "outcome": "continue", "winner": st.winner, "n": 1,
                        "lengths": exact(st.system.lengths().as_array()), "order": st.system.order(),
                        "relative_order": st.relative_order, "matrix": st.length_matrix,
                    });
                    s = st.system;
                    r
                }
                StepOutcome::Hole => json!({ "iteration": i, "outcome": "hole" }),
                StepOutcome::TieEncountered => json!({ "iteration": i, "outcome": "tie" }),
            }
        };
        let stop = rec["outcome"] != "continue";
        records.push(rec);
        if stop {
            break;
        }
    }
    let prov = provenance("step", None, json!({ "lengths": lengths, "accelerated": accelerated, "iters": iters }));
    Ok(Output::ok(match format {
        Format::Json => json_out(json!({ "records": records }), prov),
        Format::Csv => {
            let mut out = csv_header(&prov);
            out.push_str("iteration,outcome,winner,n,length1,length2,length3,order\n");
            for r in &records {
                let field = |v: &Value| match v {
                    Value::Null => String::new(),
                    Value::String(s) => s.clone(),
                    v => v.to_string(),
                };
                let l = |k: usize| field(&r["lengths"][k]);
                let order = r["order"].as_array().map(|a| a.iter().map(field).collect::<Vec<_>>().join("")).unwrap_or_default();
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    r["iteration"], field(&r["outcome"]), field(&r["winner"]), field(&r["n"]), l(0), l(1), l(2), order
                )
                .unwrap();
            }
            out
        }
    }))
}

pub fn classify(lengths: &[String], iters: u64, format: Format) -> Result<Output, Failure> {
    positive("iters", iters)?;
    let s = parse_system(lengths)?;
    let class = s.classify_thin(iters);
    let prov = provenance("classify", None, json!({ "lengths": lengths, "iters": iters }));
    let class = serde_json::to_value(class).expect("class serializes");
    Ok(Output::ok(match format {
        Format::Json => json_out(json!({ "lengths": exact(s.lengths().as_array()), "class": class }), prov),
        Format::Csv => {
            let (key, value) = class
                .as_object()
                .and_then(|o| o.iter().find(|(k, _)| *k != "outcome"))
                .map(|(k, v)| (k.clone(), v.to_string()))
                .unwrap_or_default();
            format!("{}outcome,{key}\n{},{value}\n", csv_header(&prov), class["outcome"].as_str().unwrap_or(""))
        }
    }))
}

pub fn graph(format: GraphFormat) -> Result<Output, Failure> {
    let g = graph::build_graph();
    let verdict = if g.is_strongly_connected() { "connected" } else { "disconnected" };
    let prov = provenance("graph", None, json!({}));
    Ok(Output::ok(match format {
        GraphFormat::Json => {
            let mut body = serde_json::to_value(&g).expect("graph serializes");
            body["verdict"] = json!(verdict);
            json_out(body, prov)
        }
        GraphFormat::Dot => format!("// provenance: {prov}\n// verdict: {verdict}\n{}", g.to_dot()),
        GraphFormat::Text => format!("{}verdict: {verdict}\n", g.to_text()),
    }))
}

pub fn cylinders(depth: usize, ncap: u64, floor: &str, format: Format) -> Result<Output, Failure> {
    positive("depth", depth)?;
    positive("ncap", ncap)?;
    let floor_q = rational::parse_rational(floor).map_err(|e| bad(format!("--floor: {e} (use p/q)")))?;
    if floor_q < rational::int(0) {
        return Err(bad("--floor must be non-negative"));
    }
    let prov = provenance("cylinders", None, json!({ "depth": depth, "ncap": ncap, "floor": floor }));
    let mut out = match format {
        Format::Json => format!("{}\n", json!({ "provenance": prov })),
        Format::Csv => csv_header(&prov) + "depth,kind,survives,measure,cells\n",
    };
    dimension::enumerate_cylinders(depth, &floor_q, ncap, |c| match format {
        Format::Json => writeln!(out, "{}", c.to_json()).unwrap(),
        Format::Csv => {
            let kind = serde_json::to_value(&c.kind).expect("kind serializes");
            let kind = kind.as_str().map(str::to_string).unwrap_or_else(|| kind.to_string().replace(',', ";"));
            let cells: Vec<String> =
                c.cells.iter().map(|m| format!("{}{}", m.n, if m.branch == markov::Branch::Swap { "s" } else { "c" })).collect();
            writeln!(out, "{},{},{},{},{}", c.depth(), kind, c.survives(), format_rational(&c.measure), cells.join(" ")).unwrap();
        }
    });
    Ok(Output::ok(out))
}

pub struct DimensionArgs {
    pub depth: usize,
    pub ncap: u64,
    pub floor: f64,
    pub fd_depth: usize,
    pub fd_ncap: u64,
    pub points: usize,
    pub burn_in: usize,
    pub levels: String,
    pub cloud: Option<PathBuf>,
}

fn parse_levels(s: &str) -> Result<Vec<u32>, Failure> {
    let err = || bad(format!("--levels {s:?}: expected lo-hi with 1 <= lo < hi <= 24"));
    let (lo, hi) = s.split_once('-').ok_or_else(err)?;
    let (lo, hi): (u32, u32) = (lo.trim().parse().map_err(|_| err())?, hi.trim().parse().map_err(|_| err())?);
    if lo < 1 || hi <= lo || hi > 24 {
        return Err(err());
    }
    Ok((lo..=hi).collect())
}

fn read_cloud(path: &Path) -> Result<Vec<[f64; 2]>, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let parsed = if bytes.starts_with(io::MAGIC) {
        io::points_from_binary(&bytes).map(|(p, _)| p)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| bad(format!("{}: neither a point file nor UTF-8 CSV", path.display())))?;
        io::points_from_csv(&text)
    };
    parsed.map_err(|e| bad(format!("{}: {e}", path.display())))
}

fn dimension_failure(e: DimensionError) -> Failure {
    match e {
        DimensionError::NonPositiveInput => bad(e.to_string()),
        e => Failure::Budget(e.to_string()),
    }
}

pub fn dimension(a: DimensionArgs, run: &Run, format: Format) -> Result<Output, Failure> {
    positive("depth", a.depth)?;
    positive("ncap", a.ncap)?;
    positive("fd-depth", a.fd_depth)?;
    positive("fd-ncap", a.fd_ncap)?;
    positive("workers", run.workers)?;
    if !(a.floor >= 0.0 && a.floor < 1.0) {
        return Err(bad("--floor must lie in [0, 1)"));
    }
    let cfg = PipelineConfig {
        depth: a.depth,
        ncap: a.ncap,
        floor: a.floor,
        fast_decay_depth: a.fd_depth,
        fast_decay_ncap: a.fd_ncap,
        points: a.points,
        burn_in: a.burn_in,
        grid_levels: parse_levels(&a.levels)?,
        seed: run.seed,
        workers: run.workers,
        ..PipelineConfig::default()
    };
    let prov = provenance(
        "dimension",
        Some(run.seed),
        json!({
            "depth": a.depth, "ncap": a.ncap, "floor": a.floor, "fd_depth": a.fd_depth, "fd_ncap": a.fd_ncap,
            "points": a.points, "burn_in": a.burn_in, "levels": a.levels,
            "cloud": a.cloud.as_ref().map(|p| p.display().to_string()),
        }),
    );
    if a.depth < 3 {
        // Too shallow for a decay slope: report the brackets alone.
        let brackets = dimension::survivor_masses(a.depth, a.ncap, a.floor, run.workers).map_err(dimension_failure)?;
        return Ok(Output::ok(match format {
            Format::Json => json_out(json!({ "delta_hat": null, "survivor_brackets": brackets }), prov),
            Format::Csv => {
                let mut out = csv_header(&prov) + "depth,lower,upper\n";
                for b in &brackets {
                    writeln!(out, "{},{:e},{:e}", b.depth, b.lower, b.upper).unwrap();
                }
                out
            }
        }));
    }
    let report = match &a.cloud {
        Some(path) => dimension::run_pipeline_on(&cfg, &read_cloud(path)?),
        None => {
            positive("points", a.points)?;
            dimension::run_pipeline(&cfg)
        }
    }
    .map_err(dimension_failure)?;
    let violation = (report.ad_bound >= 2.0).then(|| format!("dimension bound {} is not below 2", report.ad_bound));
    let text = match format {
        Format::Json => json_out(serde_json::to_value(&report).expect("report serializes"), prov),
        Format::Csv => {
            let mut out = csv_header(&prov) + "quantity,value\n";
            for (k, v) in [
                ("delta_hat", report.delta_hat),
                ("delta_residual", report.delta_residual),
                ("delta_prev", report.delta_prev),
                ("alpha1_hat", report.alpha1_hat),
                ("alpha1_residual", report.alpha1_residual),
                ("ad_bound", report.ad_bound),
                ("box_dim", report.box_dim),
                ("box_residual", report.box_residual),
            ] {
                writeln!(out, "{k},{v:e}").unwrap();
            }
            for b in &report.survivor_brackets {
                writeln!(out, "survivor_lower_{},{:e}\nsurvivor_upper_{},{:e}", b.depth, b.lower, b.depth, b.upper).unwrap();
            }
            out
        }
    };
    Ok(Output { text, violation })
}

pub fn tail(kind: TailKind, samples: u64, grid: (f64, f64, usize), cap: usize, run: &Run, format: Format) -> Result<Output, Failure> {
    positive("samples", samples)?;
    positive("cap", cap)?;
    positive("workers", run.workers)?;
    let (lo, hi, count) = grid;
    if !(lo > 0.0 && hi > lo && count >= 2) {
        return Err(bad("grid needs 0 < min < max and at least two points"));
    }
    let grid = suspension::log_grid(lo, hi, count);
    let name = match kind {
        TailKind::Roof => "roof",
        TailKind::Balance => "balance",
    };
    let prov = provenance(
        "tail",
        Some(run.seed),
        json!({ "kind": name, "samples": samples, "grid": [lo, hi, count], "cap": cap }),
    );
    let text = match kind {
        TailKind::Roof => {
            let tc = suspension::roof_tail(&suspension::Loop::default_loop(), samples, &grid, run.seed, run.workers, cap);
            match format {
                Format::Json => json_out(serde_json::to_value(&tc).expect("tail serializes"), prov),
                Format::Csv => csv_header(&prov) + &tc.to_csv(),
            }
        }
        TailKind::Balance => {
            let r = measure::mc_balance(&grid, [1.0, 1.0, 1.0], samples, run.seed, run.workers, cap);
            match format {
                Format::Json => {
                    let mut body = serde_json::to_value(&r).expect("balance serializes");
                    body["witness"] = json!(r.witness());
                    json_out(body, prov)
                }
                Format::Csv => {
                    let mut out = csv_header(&prov) + "c,probability\n";
                    for (c, p) in r.c_grid.iter().zip(&r.probabilities) {
                        writeln!(out, "{c:e},{p:e}").unwrap();
                    }
                    out
                }
            }
        }
    };
    Ok(Output::ok(text))
}

#[allow(clippy::too_many_arguments)]
pub fn verify(
    suite: Suite,
    samples: Option<u64>,
    max_len: usize,
    nmax: u64,
    ncap: u64,
    run: &Run,
    format: Format,
) -> Result<Output, Failure> {
    positive("workers", run.workers)?;
    if let Some(s) = samples {
        positive("samples", s)?;
    }
    positive("nmax", nmax)?;
    positive("ncap", ncap)?;
    let (name, report) = match suite {
        Suite::Lemma2 => ("lemma2", verify::lemma2(max_len)),
        Suite::Lemma3 => ("lemma3", verify::lemma3(samples.unwrap_or(100_000), nmax, run.seed, run.workers)),
        Suite::Kerckhoff => ("kerckhoff", verify::kerckhoff(samples.unwrap_or(1_000_000), run.seed, run.workers)),
        Suite::RoofJacobian => ("roof-jacobian", verify::roof_jacobian(samples.unwrap_or(100_000), run.seed, run.workers)),
        Suite::Partition => ("partition", verify::partition(ncap)),
    };
    let prov = provenance(
        "verify",
        report.seed,
        json!({ "suite": name, "samples": report.samples, "max_len": max_len, "nmax": nmax, "ncap": ncap }),
    );
    let text = match format {
        Format::Json => json_out(serde_json::to_value(&report).expect("report serializes"), prov),
        Format::Csv => {
            let mut out = csv_header(&prov) + "check,passed,checked,violations,worst_margin\n";
            for c in &report.checks {
                writeln!(out, "{},{},{},{},{:e}", c.name, c.passed, c.checked, c.violations, c.worst_margin).unwrap();
            }
            out
        }
    };
    let violation = (!report.passed).then(|| format!("suite {name} failed"));
    Ok(Output { text, violation })
}

fn parse_size(s: &str) -> Result<(usize, usize), Failure> {
    let err = || bad(format!("--size {s:?}: expected WxH, both at least 64"));
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(err)?;
    let (w, h): (usize, usize) = (w.parse().map_err(|_| err())?, h.parse().map_err(|_| err())?);
    if w < 64 || h < 64 || w > 16_384 || h > 16_384 {
        return Err(err());
    }
    Ok((w, h))
}

pub fn render(points: usize, burn_in: usize, size: &str, out: &Path, cloud: Option<&Path>, run: &Run) -> Result<Output, Failure> {
    let (w, h) = parse_size(size)?;
    positive("points", points)?;
    positive("workers", run.workers)?;
    let prov = provenance("render", Some(run.seed), json!({ "points": points, "burn_in": burn_in, "size": [w, h] }));
    let bary = markov::chaos_game_barycentric(points, burn_in, run.seed, None, run.workers);
    let raster = io::render(&bary, w, h);
    let write = |path: &Path, bytes: &[u8]| std::fs::write(path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())));
    write(out, &raster.to_pgm(&format!("rauzy gasket {prov}")))?;
    if let Some(path) = cloud {
        let chart: Vec<[f64; 2]> = bary
            .iter()
            .map(|&x| {
                let p = markov::ChartPoint::from_lengths(x);
                [p.a, p.b]
            })
            .collect();
        let bytes = if path.extension().is_some_and(|e| e == "csv") {
            io::points_to_csv(&chart, &[format!("provenance: {prov}")]).into_bytes()
        } else {
            io::points_to_binary(&chart, &prov)
        };
        write(path, &bytes)?;
    }
    // Points near each vertex of the simplex: that coordinate above 1/2.
    let corners: Vec<usize> = (0..3).map(|i| bary.iter().filter(|x| x[i] > 0.5).count()).collect();
    let body = json!({
        "out": out.display().to_string(),
        "width": w,
        "height": h,
        "points": points,
        "lit_pixels": raster.lit(),
        "corner_points": corners,
    });
    Ok(Output::ok(json_out(body, prov)))
}

pub fn distortion(pairs: u64, nmax: u64, run: &Run, format: Format) -> Result<Output, Failure> {
    positive("pairs", pairs)?;
    positive("nmax", nmax)?;
    positive("workers", run.workers)?;
    let stats = verify::distortion(pairs, nmax, run.seed, run.workers);
    let prov = provenance("distortion", Some(run.seed), json!({ "pairs": pairs, "nmax": nmax }));
    let text = match format {
        Format::Json => {
            let mut body = serde_json::to_value(&stats).expect("stats serialize");
            body["constant"] = json!(verify::DISTORTION_C);
            json_out(body, prov)
        }
        Format::Csv => format!(
            "{}pairs,worst_constant,violations,rejected,constant\n{},{:e},{},{},{}\n",
            csv_header(&prov),
            stats.pairs,
            stats.worst_constant,
            stats.violations,
            stats.rejected,
            verify::DISTORTION_C
        ),
    };
    let violation = (stats.violations > 0).then(|| format!("{} pairs exceed the distortion constant", stats.violations));
    Ok(Output { text, violation })
}
