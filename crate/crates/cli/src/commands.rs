use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dvp_core::directional::{directional_report, BoxSpline, DirectionalRun, DirectionalSetup, SquareImage};
use dvp_core::dlvp::{scaling_spectrum, two_scale, wavelet_spectrum, wavelet_two_scale, BasisFunction, SparseSpectrum};
use dvp_core::intlat::{pattern, ChainSpec, GeneratingSet, IntMat, Variant};
use dvp_core::latfft::{dft, dft_fast};
use dvp_core::mra::{check_reduction, check_reduction_hd, mr1_of, mra_report, ReductionMode};
use dvp_core::transform::{sample_series, synthesize, write_coeff_csv, FilterBank, SampleGrid};
use dvp_core::Tolerances;

use crate::config::{Builtin, Reduction, RunConfig};
use crate::pgm::{read_pgm, write_pgm};
use crate::CliError;

/// Largest pattern for which `dft` also runs the naive transform.
const NAIVE_LIMIT: usize = 4096;

fn create(out: &Path, name: &str) -> Result<BufWriter<fs::File>, CliError> {
    Ok(BufWriter::new(fs::File::create(out.join(name))?))
}

fn prepare_out(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    Ok(())
}

fn fmt_c(c: Complex<f64>) -> String {
    format!("{:.16e},{:.16e}", c.re, c.im)
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn index_header(prefix: &str, d: usize) -> String {
    (1..=d).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>().join(",")
}

fn write_spectrum(s: &SparseSpectrum<f64>, out: &Path, name: &str) -> Result<(), CliError> {
    let mut w = create(out, name)?;
    s.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Writes `pattern.csv` and `genset.csv` for `m0`.
pub fn cmd_pattern(cfg: &RunConfig, out: &Path, variant: Variant) -> Result<(), CliError> {
    let m = cfg.m0()?;
    prepare_out(out)?;
    let d = m.dim();
    let p = pattern(&m, variant)?;
    let mut w = create(out, "pattern.csv")?;
    writeln!(w, "index,{},den,{}", index_header("num", d), index_header("y", d))?;
    for (i, y) in p.points().iter().enumerate() {
        let dec: Vec<String> = y.to_f64().iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{i},{},{},{}", join(y.numerators()), y.denominator(), dec.join(","))?;
    }
    w.flush()?;
    let g = GeneratingSet::new(&m.transpose(), variant)?;
    let mut w = create(out, "genset.csv")?;
    writeln!(w, "index,{}", index_header("k", d))?;
    for (i, k) in g.reps().iter().enumerate() {
        writeln!(w, "{i},{}", join(k))?;
    }
    w.flush()?;
    println!("m: {}", p.len());
    println!("variant: {variant}");
    Ok(())
}

/// Reads one value per row in pattern order. A single column is the real
/// part; otherwise the last two columns are `re,im`. A non-numeric first
/// line is taken as a header.
pub fn read_samples_csv(path: &Path, m: &IntMat) -> Result<SampleGrid<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        match fields {
            Ok(f) if f.len() == 1 => values.push(Complex::new(f[0], 0.0)),
            Ok(f) if !f.is_empty() => values.push(Complex::new(f[f.len() - 2], f[f.len() - 1])),
            _ if n == 0 => continue,
            _ => return Err(CliError::Config(format!("{}: bad row {}", path.display(), n + 1))),
        }
    }
    let want = m.abs_det() as usize;
    if values.len() != want {
        return Err(CliError::Config(format!("input has {} samples, the pattern of {m} needs {want}", values.len())));
    }
    Ok(SampleGrid::new(m.clone(), values)?)
}

/// Samples on the pattern of `m` from `input` or `builtin`.
fn load_samples(cfg: &RunConfig, m: &IntMat) -> Result<SampleGrid<f64>, CliError> {
    let n = m.abs_det() as usize;
    match (cfg.input(), cfg.builtin()?) {
        (Some(_), Some(_)) => Err(CliError::Config("give only one of `input` and `builtin`".into())),
        (None, None) => Err(CliError::Config("missing key `input` or `builtin`".into())),
        (Some(path), None) => {
            if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
                let img = read_pgm(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                let sg = img.to_grid::<f64>()?;
                if sg.matrix() != m {
                    return Err(CliError::Config(format!(
                        "image gives the grid {}, the chain needs {m}",
                        sg.matrix()
                    )));
                }
                Ok(sg)
            } else {
                read_samples_csv(&path, m)
            }
        }
        (None, Some(b)) => {
            let values = match b {
                Builtin::Zero => vec![Complex::new(0.0, 0.0); n],
                Builtin::Constant => vec![Complex::new(1.0, 0.0); n],
                Builtin::Random => {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed()?);
                    (0..n).map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
                }
                Builtin::BoxSpline2d => {
                    let radius = 2 * m.entries().iter().map(|x| x.abs()).max().unwrap_or(1);
                    return Ok(BoxSpline::twelve_lines(0.45, 0.9).sample(m, radius)?);
                }
            };
            Ok(SampleGrid::new(m.clone(), values)?)
        }
    }
}

/// Fast lattice DFT of the samples on `m0`, written as `dft.csv`.
pub fn cmd_dft(cfg: &RunConfig, out: &Path, variant: Variant) -> Result<(), CliError> {
    let m = cfg.m0()?;
    let sg = load_samples(cfg, &m)?;
    prepare_out(out)?;
    let hat = dft_fast(&m, sg.as_pattern_vector())?;
    let g = GeneratingSet::new(&m.transpose(), variant)?;
    let mut w = create(out, "dft.csv")?;
    writeln!(w, "{},re,im", index_header("h", m.dim()))?;
    for (h, c) in g.reps().iter().zip(hat.values()) {
        writeln!(w, "{},{}", join(h), fmt_c(*c))?;
    }
    w.flush()?;
    println!("m: {}", hat.len());
    if hat.len() <= NAIVE_LIMIT {
        let naive = dft(&m, sg.as_pattern_vector())?;
        let err = hat.values().iter().zip(naive.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        println!("naive_max_abs_diff: {err:.3e}");
    }
    Ok(())
}

/// Raw scaling and wavelet spectra per level, and the two-scale symbols.
pub fn cmd_build(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let chain = cfg.chain()?;
    let g = cfg.window(chain.dim())?;
    let wavelets = match cfg.flag("wavelets")? {
        Some(true) => {
            chain.require_dyadic()?;
            true
        }
        Some(false) => false,
        None => chain.is_dyadic(),
    };
    prepare_out(out)?;
    let d = chain.dim();
    for l in 0..=chain.n() {
        let phi = scaling_spectrum(&chain, l, &g)?;
        write_spectrum(phi.spectrum(), out, &format!("phi_{l}.csv"))?;
        println!("level.{l}.m: {}", chain.size(l));
        println!("level.{l}.phi_terms: {}", phi.spectrum().len());
        println!("level.{l}.phi_max_abs: {:.16e}", phi.spectrum().max_abs());
        if l == chain.n() {
            break;
        }
        let a = two_scale(&chain, l, &g)?;
        let b = if wavelets {
            let psi = wavelet_spectrum(&chain, l, &g)?;
            write_spectrum(psi.spectrum(), out, &format!("psi_{l}.csv"))?;
            println!("level.{l}.psi_terms: {}", psi.spectrum().len());
            Some(wavelet_two_scale(&chain, l, &g)?)
        } else {
            None
        };
        let classes = GeneratingSet::new(&chain.level_matrix(l + 1).transpose(), Variant::Symmetric)?;
        let mut w = create(out, &format!("twoscale_{l}.csv"))?;
        let extra = if b.is_some() { ",b_re,b_im" } else { "" };
        writeln!(w, "{},a_re,a_im{extra}", index_header("h", d))?;
        for (i, h) in classes.reps().iter().enumerate() {
            write!(w, "{},{}", join(h), fmt_c(a.values.values()[i]))?;
            if let Some(b) = &b {
                write!(w, ",{}", fmt_c(b.values.values()[i]))?;
            }
            writeln!(w)?;
        }
        w.flush()?;
    }
    Ok(())
}

/// MRA report and optional reduction checks. `Ok(false)` is a failed
/// verification.
pub fn cmd_verify(cfg: &RunConfig) -> Result<bool, CliError> {
    let chain = cfg.chain()?;
    let g = cfg.window(chain.dim())?;
    let mut report = mra_report(&chain, &g)?;
    if let Some(level) = cfg.inject_mr1()? {
        chain.check_level(level)?;
        let m = chain.level_matrix(level);
        let s = scaling_spectrum(&chain, level, &g)?;
        let classes = GeneratingSet::new(&m.transpose(), Variant::Symmetric)?;
        let kept = s.spectrum().iter().filter(|(k, _)| classes.class_index(k) != 0).map(|(k, c)| (k.clone(), *c));
        let broken = SparseSpectrum::from_pairs(chain.dim(), kept);
        let mr1 = mr1_of(&broken, m)?;
        let rec = &mut report.levels[level];
        rec.mr1_dim_ok = mr1.dim_ok;
        rec.mr1_min_class_power = mr1.min_class_power;
        println!("injected: mr1 class 0 zeroed on level {level}");
    }
    println!("{report}");
    let mut ok = report.passed();
    if let Some(mode) = cfg.reduction()? {
        let holds = match mode {
            Reduction::Single | Reduction::Double => {
                let j = match cfg.reduction_factor()? {
                    Some(j) => j,
                    None if chain.n() > 0 => chain.factor(1).clone(),
                    None => return Err(CliError::Config("reduction needs `reduction_factor` or a factor".into())),
                };
                let m = if mode == Reduction::Single { ReductionMode::Single } else { ReductionMode::Double };
                let r = check_reduction(&g, &j, m)?;
                println!("reduction.mode: {}", if mode == Reduction::Single { "single" } else { "double" });
                println!("reduction.factor: {j}");
                println!("reduction.max_deviation: {:.3e}", r.max_deviation);
                println!("reduction.witness: ({:.6}, {:.6})", r.witness[0], r.witness[1]);
                println!("reduction.holds: {}", r.holds);
                r.holds
            }
            Reduction::Chain => {
                let levels = check_reduction_hd(&g, &chain)?;
                println!("reduction.mode: chain");
                let mut all = true;
                for r in &levels {
                    let l = r.level;
                    println!("reduction.level.{l}.to_single: {}", r.to_single);
                    println!("reduction.level.{l}.single_deviation: {:.3e}", r.single_deviation);
                    if let Some(e) = r.to_empty {
                        println!("reduction.level.{l}.to_empty: {e}");
                    }
                    all &= r.to_single && r.to_empty.unwrap_or(true);
                }
                println!("reduction.holds: {all}");
                all
            }
        };
        if cfg.flag("require_reduction")?.unwrap_or(false) {
            ok &= holds;
        }
    }
    println!("verified: {ok}");
    Ok(ok)
}

fn is_square_grid(m: &IntMat) -> bool {
    let r = m.get(0, 0);
    m.dim() == 2 && r > 0 && r % 2 == 0 && m.get(1, 1) == r && m.get(0, 1) == 0 && m.get(1, 0) == 0
}

/// Multilevel decomposition of the configured samples. `Ok(false)` means
/// the roundtrip check failed.
pub fn cmd_decompose(
    cfg: &RunConfig,
    out: &Path,
    variant: Variant,
    depth: Option<usize>,
    roundtrip: bool,
) -> Result<bool, CliError> {
    let chain = cfg.chain()?;
    chain.require_dyadic()?;
    let g = cfg.window(chain.dim())?;
    let depth = match depth {
        Some(d) => d,
        None => cfg.depth()?.unwrap_or(chain.n()),
    };
    if depth > chain.n() {
        return Err(CliError::Config(format!("depth {depth} exceeds the {} chain factors", chain.n())));
    }
    let top = chain.level_matrix(chain.n()).clone();
    let sg = load_samples(cfg, &top)?;
    let render = cfg.flag("render")?.unwrap_or_else(|| is_square_grid(&top));
    if render && !is_square_grid(&top) {
        return Err(CliError::Config(format!("render needs a top grid diag(R, R) with R even, got {top}")));
    }
    prepare_out(out)?;
    let bank = FilterBank::new(&chain, &g, depth)?;
    let r = bank.decompose_samples(&sg)?;
    let coarse_name = format!("coarse_{}.csv", r.coarse_level);
    let mut w = create(out, &coarse_name)?;
    write_coeff_csv(&r.coarse, variant, &mut w)?;
    w.flush()?;
    for d in &r.details {
        let mut w = create(out, &format!("detail_{}.csv", d.level))?;
        write_coeff_csv(&d.coeffs, variant, &mut w)?;
        w.flush()?;
        if render {
            let values = sample_series(&bank.detail_series(&r, d.level)?, &top)?;
            let img = SquareImage::from_grid(&values, |v| v.re)?;
            write_pgm(&img, &out.join(format!("detail_{}.pgm", d.level)))?;
        }
    }
    println!("coarse_level: {}", r.coarse_level);
    println!("coefficients: {}", r.coefficient_count());
    println!("energy: {:.16e}", r.energy());
    for d in &r.details {
        println!("detail.{}.energy: {:.16e}", d.level, d.coeffs.energy());
    }
    if !roundtrip {
        return Ok(true);
    }
    let coeffs = bank.reconstruct(&r)?;
    let back = synthesize(&coeffs, bank.top_scaling(), &top)?;
    let err = back.max_abs_diff(&sg);
    let tol = Tolerances::DEFAULT.interpolation;
    println!("roundtrip_max_error: {err:.3e}");
    Ok(err < tol)
}

fn summary_lines(tag: &str, run: &DirectionalRun) -> Vec<String> {
    let mut v = Vec::new();
    for (part, lines, points) in
        [("first", &run.first_lines, &run.first_points), ("second", &run.second_lines, &run.second_points)]
    {
        v.push(format!("{tag}.{part}.line_fraction: {:.6}", lines.fraction));
        v.push(format!("{tag}.{part}.line_peak_to_background: {:.6}", lines.peak_to_background));
        v.push(format!("{tag}.{part}.point_fraction: {:.6}", points.fraction));
        v.push(format!("{tag}.{part}.point_peak_to_background: {:.6}", points.peak_to_background));
    }
    v
}

/// Threshold on the share of first wavelet part energy near the lines.
pub const LINE_FRACTION: f64 = 0.8;

/// Directional detection demo. `Ok(false)` when a detection check fails.
pub fn cmd_demo_directional(cfg: Option<&RunConfig>, out: &Path, paper_scale: bool) -> Result<bool, CliError> {
    let scale = match cfg {
        Some(c) => c.scale()?,
        None => None,
    };
    let setup = match (paper_scale, scale) {
        (true, Some(_)) => return Err(CliError::Config("`scale` conflicts with --paper-scale".into())),
        (true, None) => DirectionalSetup::full(),
        (false, Some(s)) => DirectionalSetup::with_scale(s)?,
        (false, None) => DirectionalSetup::desk(),
    };
    prepare_out(out)?;
    let report = directional_report(&setup)?;
    write_pgm(&report.dvp.first_detail, &out.join("g_N1.pgm"))?;
    write_pgm(&report.dvp.second_detail, &out.join("g_N2.pgm"))?;
    write_pgm(&report.dirichlet.first_detail, &out.join("g_N1_dirichlet.pgm"))?;
    write_pgm(&report.dirichlet.second_detail, &out.join("g_N2_dirichlet.pgm"))?;
    let (dvp, dir) = (&report.dvp, &report.dirichlet);
    let checks = [
        ("check.first_lines", dvp.first_lines.fraction >= LINE_FRACTION),
        ("check.second_points", dvp.second_points.fraction > dvp.first_points.fraction),
        ("check.second_not_lines", dvp.second_lines.fraction < dvp.first_lines.fraction),
        (
            "check.dvp_beats_dirichlet",
            dvp.first_lines.peak_to_background > dir.first_lines.peak_to_background
                && dvp.second_points.peak_to_background > dir.second_points.peak_to_background,
        ),
    ];
    let mut lines = vec![
        format!("grid: {}", setup.grid()),
        format!("first_chain: {} | {}", setup.first.m0(), join_factors(&setup.first)),
        format!("second_chain: {} | {}", setup.second.m0(), join_factors(&setup.second)),
        format!("alpha: {}", setup.alpha),
        format!("jump_lines: {}", report.segments.len()),
        format!("endpoints: {}", report.endpoints.len()),
        format!("line_band: {}", setup.band),
        format!("point_disk: {}", setup.disk),
    ];
    lines.extend(summary_lines("dvp", dvp));
    lines.extend(summary_lines("dirichlet", dir));
    let mut ok = true;
    for (name, pass) in checks {
        lines.push(format!("{name}: {pass}"));
        ok &= pass;
    }
    lines.push(format!("passed: {ok}"));
    let text = lines.join("\n") + "\n";
    fs::write(out.join("summary.txt"), &text)?;
    print!("{text}");
    Ok(ok)
}

fn join_factors(chain: &ChainSpec) -> String {
    chain.factors().iter().map(ToString::to_string).collect::<Vec<_>>().join(" | ")
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<dvp_core::Error> for CliError {
    fn from(e: dvp_core::Error) -> Self {
        CliError::Core(e)
    }
}
