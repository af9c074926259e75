use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use wachfam::config::check_k;
use wachfam::suites;
use wachfam::{
    build_family, parse_alpha, AppError, FamilyFile, LambdaCache, LoadedFamily, OutputFormat,
    ProfileHeader, Report, Result, RunConfig,
};
use wachfam_core::lab::{
    classify_reduction_label, congruent, reduce_matrix, sample_alphas, specialize,
};
use wachfam_core::wach::newton_slopes;
use wachfam_core::{LambdaEngine, PadicScalar, PrecisionProfile, Valuation};

/// Build and verify one-parameter families of rank-2 Wach modules.
#[derive(Debug, Parser)]
#[command(name = "wachfam", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Odd prime p.
    #[arg(long = "p", global = true, env = "WACHFAM_P")]
    p: Option<u32>,
    /// p-adic digits certified.
    #[arg(long, global = true, env = "WACHFAM_CAP_P", default_value_t = 12)]
    cap_p: u32,
    /// Series are truncated mod π^cap_pi.
    #[arg(long, global = true, env = "WACHFAM_CAP_PI", default_value_t = 60)]
    cap_pi: usize,
    /// Families are truncated mod X^cap_x.
    #[arg(long, global = true, env = "WACHFAM_CAP_X", default_value_t = 5)]
    cap_x: usize,
    #[arg(
        long,
        global = true,
        env = "WACHFAM_FORMAT",
        value_enum,
        default_value_t
    )]
    format: OutputFormat,
    /// Directory for cached λ± (memory only if unset).
    #[arg(long, global = true, env = "WACHFAM_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute λ± and check their identities.
    Lambda {
        /// χ values for the γ-ratio checks (default: the standard set).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        chi: Vec<i64>,
    },
    /// Build P(X) and G_γ(X) for weight k and write the family file.
    Build {
        #[arg(long, env = "WACHFAM_K")]
        k: Option<u32>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        chi: Vec<i64>,
        /// Output file (stdout if unset).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every suite on a family file.
    Verify {
        file: PathBuf,
        /// Evaluation points in pZ_p, as `u*p^v`; repeatable.
        #[arg(long)]
        alpha: Vec<String>,
        /// Also use the built-in sample points 0, p, p², p+p², (p−1)p.
        #[arg(long)]
        samples: bool,
    },
    /// Specialize a family at X = α and print the filtered φ-module.
    Specialize {
        file: PathBuf,
        #[arg(long)]
        alpha: String,
    },
    /// Print Fil^i of the specialization for 0 ≤ i ≤ k+2.
    Fil {
        file: PathBuf,
        #[arg(long)]
        alpha: String,
    },
    /// Compare the mod-p reduction at α with the one at 0.
    Reduce {
        file: PathBuf,
        #[arg(long)]
        alpha: String,
    },
    /// Table of m, minimal m and congruence bounds for 2 ≤ k ≤ k_max.
    #[command(alias = "zscan")]
    Scan {
        #[arg(long, env = "WACHFAM_K_MAX")]
        k_max: u32,
    },
    /// Build and verify a few small families end to end.
    Selftest,
}

struct App {
    global: Global,
    cache: LambdaCache,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cache = match &cli.global.cache_dir {
        Some(d) => LambdaCache::with_dir(d),
        None => LambdaCache::in_memory(),
    };
    let app = App {
        global: cli.global,
        cache,
    };
    match app.run(cli.command) {
        Ok(report) if report.all_passed() => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("wachfam: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Write to stdout; a reader that went away early is not an error.
fn out(s: &str) {
    let mut stdout = io::stdout().lock();
    if let Err(e) = stdout.write_all(s.as_bytes()).and_then(|()| stdout.flush()) {
        if e.kind() != io::ErrorKind::BrokenPipe {
            eprintln!("wachfam: writing output: {e}");
        }
    }
}

impl App {
    fn config(&self) -> Result<RunConfig> {
        let g = &self.global;
        let p =
            g.p.ok_or_else(|| AppError::Config("--p is required".into()))?;
        let mut c = RunConfig::new(p, g.cap_p, g.cap_pi, g.cap_x)?;
        c.format = g.format;
        c.cache_dir.clone_from(&g.cache_dir);
        Ok(c)
    }

    fn engine(&self, profile: PrecisionProfile) -> Result<LambdaEngine> {
        self.cache.engine(profile)
    }

    fn emit(&self, text: String, json: serde_json::Value) {
        match self.global.format {
            OutputFormat::Text => out(&text),
            OutputFormat::Json => out(&format!(
                "{}\n",
                serde_json::to_string_pretty(&json).expect("json output")
            )),
        }
    }

    fn emit_report(&self, report: &Report) {
        match self.global.format {
            OutputFormat::Text => out(&report.to_text()),
            OutputFormat::Json => out(&report.to_json()),
        }
    }

    fn run(&self, command: Command) -> Result<Report> {
        match command {
            Command::Lambda { chi } => self.lambda(chi),
            Command::Build { k, chi, out } => self.build(k, chi, out.as_deref()),
            Command::Verify {
                file,
                alpha,
                samples,
            } => self.verify(&file, &alpha, samples),
            Command::Specialize { file, alpha } => self.specialize(&file, &alpha),
            Command::Fil { file, alpha } => self.fil(&file, &alpha),
            Command::Reduce { file, alpha } => self.reduce(&file, &alpha),
            Command::Scan { k_max } => self.scan(k_max),
            Command::Selftest => self.selftest(),
        }
    }

    fn lambda(&self, chi: Vec<i64>) -> Result<Report> {
        let mut config = self.config()?;
        config.chis = chi;
        let engine = self.engine(config.profile)?;
        let mut report = Report::default();
        report.extend(suites::lambda_suite(&engine, &config.gammas()?));
        let h = ProfileHeader::from(&config.profile);
        let factors = engine.pair().factors_used;
        let checks = engine.check_identities();
        let text = format!(
            "p: {}\ncap_p: {}\ncap_pi: {}\nfactors_used: {factors}\nconstant_terms: {}\nring_r: {}\nfrobenius_relations: {}\n",
            h.p,
            h.cap_p,
            h.cap_pi,
            checks.constant_terms,
            checks.ring_r,
            checks.frobenius_minus && checks.frobenius_plus
        );
        self.emit(
            text + &report.to_text(),
            json!({
                "p": h.p,
                "cap_p": h.cap_p,
                "cap_pi": h.cap_pi,
                "factors_used": factors,
                "constant_terms": checks.constant_terms,
                "ring_r": checks.ring_r,
                "frobenius_relations": checks.frobenius_minus && checks.frobenius_plus,
                "certificates": report.certificates,
            }),
        );
        Ok(report)
    }

    fn build(&self, k: Option<u32>, chi: Vec<i64>, dest: Option<&Path>) -> Result<Report> {
        let mut config = self.config()?;
        config.k = k;
        config.chis = chi;
        let k = config.require_k()?;
        let engine = self.engine(config.profile)?;
        let (family, order) = build_family(&engine, k, &config.gammas()?)?;
        let body = FamilyFile::from_family(&family).to_json();
        match dest {
            Some(path) => {
                fs::write(path, &body).map_err(|e| AppError::io(path, e))?;
                let chis: Vec<String> = family.gammas().map(|(g, _)| g.key()).collect();
                self.emit(
                    format!(
                        "wrote {}: p={} k={k} m={} gammas={} residual vanishes mod pi^{order}\n",
                        path.display(),
                        family.p(),
                        family.m(),
                        chis.join(",")
                    ),
                    json!({ "file": path, "p": family.p(), "k": k, "m": family.m(), "gammas": chis, "residual_order": order }),
                );
            }
            None => out(&body),
        }
        Ok(Report::default())
    }

    fn load(&self, file: &Path) -> Result<LoadedFamily> {
        let text = fs::read_to_string(file).map_err(|e| AppError::io(file, e))?;
        FamilyFile::from_json(&text)?.load()
    }

    fn verify(&self, file: &Path, alpha: &[String], samples: bool) -> Result<Report> {
        let loaded = self.load(file)?;
        let profile = *loaded.family.profile();
        let mut alphas = alpha
            .iter()
            .map(|a| parse_alpha(a, &profile))
            .collect::<Result<Vec<_>>>()?;
        if samples {
            alphas.extend(sample_alphas(profile.p(), profile.lift_digits()));
        }
        let engine = self.engine(profile)?;
        let report = suites::verify(&loaded, &engine, &alphas);
        self.emit_report(&report);
        Ok(report)
    }

    fn specialize(&self, file: &Path, alpha: &str) -> Result<Report> {
        let loaded = self.load(file)?;
        let family = &loaded.family;
        let alpha = parse_alpha(alpha, family.profile())?;
        let module = specialize(family, &alpha)?;
        let d = module.dcris()?;
        let v = match module.a_p().valuation() {
            Valuation::Exact(v) => Some(v),
            _ => None,
        };
        let slopes = newton_slopes(family.k(), v);
        let slope = |(n, d): (i64, i64)| {
            if d == 1 {
                n.to_string()
            } else {
                format!("{n}/{d}")
            }
        };
        let fm = &d.frobenius_matrix;
        self.emit(
            format!(
                "k: {}\nalpha: {alpha}\na_p: {}\nprecision: p^{}\nfrobenius: {fm}\njumps: {:?}\nslopes: {} {}\n",
                family.k(),
                module.a_p(),
                module.precision(),
                d.jumps,
                slope(slopes[0]),
                slope(slopes[1])
            ),
            json!({
                "k": family.k(),
                "alpha": alpha.to_string(),
                "a_p": module.a_p().to_string(),
                "precision": module.precision(),
                "frobenius_matrix": fm.e.iter().map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "jumps": d.jumps,
                "slopes": slopes.iter().map(|&s| slope(s)).collect::<Vec<_>>(),
            }),
        );
        Ok(Report::default())
    }

    fn fil(&self, file: &Path, alpha: &str) -> Result<Report> {
        let loaded = self.load(file)?;
        let family = &loaded.family;
        let alpha = parse_alpha(alpha, family.profile())?;
        let module = specialize(family, &alpha)?;
        let top = (i64::from(family.k()) + 2).min(family.profile().cap_pi() as i64 - 1);
        let bases = (0..=top)
            .map(|i| module.fil_basis(i))
            .collect::<wachfam_core::Result<Vec<_>>>()?;
        let text: String = bases
            .iter()
            .map(|b| format!("Fil^{:<3} = {}\n", b.i, b))
            .collect();
        let rows: Vec<_> = bases
            .iter()
            .map(|b| json!({ "i": b.i, "n1_shift": b.n1_shift, "n2_shift": b.n2_shift, "witnesses": b.witnesses }))
            .collect();
        self.emit(
            text,
            json!({ "k": family.k(), "alpha": alpha.to_string(), "fil": rows }),
        );
        Ok(Report::default())
    }

    fn reduce(&self, file: &Path, alpha: &str) -> Result<Report> {
        let loaded = self.load(file)?;
        let family = &loaded.family;
        let p = family.p();
        let alpha = parse_alpha(alpha, family.profile())?;
        let at = specialize(family, &alpha)?;
        let zero = specialize(family, &PadicScalar::zero(p))?;
        let same = congruent(&at, &zero, 1)?;
        let label = classify_reduction_label(p, family.k());
        let pbar = reduce_matrix(&at.p_alpha())?;
        let show = |v: &Vec<u32>| {
            v.iter()
                .take(8)
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut report = Report::default();
        report.push(wachfam::Certificate::new(
            wachfam_core::claims::CONGRUENCE_MOD_P,
            family.profile().into(),
            format!("k={} alpha={alpha}", family.k()),
            same,
        ));
        self.emit(
            format!(
                "k: {}\nalpha: {alpha}\nP mod p (first 8 pi-coefficients):\n  [{}] [{}]\n  [{}] [{}]\nagrees with alpha=0 mod p: {same}\nlabel at a_p=0: {label}\n",
                family.k(),
                show(&pbar.e[0][0]),
                show(&pbar.e[0][1]),
                show(&pbar.e[1][0]),
                show(&pbar.e[1][1]),
            ),
            json!({
                "k": family.k(),
                "alpha": alpha.to_string(),
                "p_mod_p": pbar.e,
                "agrees_with_zero": same,
                "label": label.to_string(),
            }),
        );
        Ok(report)
    }

    fn scan(&self, k_max: u32) -> Result<Report> {
        let config = self.config()?;
        check_k(&config.profile, k_max)?;
        let engine = self.engine(config.profile)?;
        let (rows, certs) = suites::bound_table(&engine, k_max);
        let mut report = Report::default();
        for k in 2..=k_max {
            report.extend(suites::z_row(&engine, k));
        }
        report.extend(certs);
        let p = config.profile.p();
        let mut text = format!(
            "{:>4}  {:>10}  {:>9}  {:>5}  {}\n",
            "k", "standard_m", "minimal_m", "bound", "label"
        );
        for r in &rows {
            text += &format!(
                "{:>4}  {:>10}  {:>9}  {:>5}  {}\n",
                r.k,
                r.standard_m,
                r.minimal_m,
                r.reduction_bound,
                classify_reduction_label(p, r.k)
            );
        }
        let json_rows: Vec<_> = rows
            .iter()
            .map(|r| {
                json!({
                    "k": r.k,
                    "standard_m": r.standard_m,
                    "minimal_m": r.minimal_m,
                    "reduction_bound": r.reduction_bound,
                    "label": classify_reduction_label(p, r.k).to_string(),
                })
            })
            .collect();
        let failed: Vec<_> = report.certificates.iter().filter(|c| !c.passed).collect();
        for c in &failed {
            text += &format!(
                "FAIL {} {} {}\n",
                c.claim,
                c.subject,
                c.detail.as_deref().unwrap_or("")
            );
        }
        self.emit(
            text,
            json!({ "p": p, "rows": json_rows, "certificates": report.certificates }),
        );
        Ok(report)
    }

    fn selftest(&self) -> Result<Report> {
        let mut report = Report::default();
        for p in [3u32, 5, 7] {
            let profile = PrecisionProfile::new(p, 8, 20, 3)?;
            let engine = self.engine(profile)?;
            let gammas = wachfam_core::wach::standard_gammas(&profile)?;
            report.extend(suites::lambda_suite(&engine, &gammas));
            for k in [2, p + 1, p + 2] {
                let (family, _) = build_family(&engine, k, &gammas)?;
                let file = FamilyFile::from_family(&family);
                let text = file.to_json();
                let reread = FamilyFile::from_json(&text)?;
                let loaded = reread.load()?;
                let round_trip = FamilyFile::from_family(&loaded.family).to_json() == text;
                report.push(wachfam::Certificate::new(
                    wachfam_core::claims::SERIALIZATION,
                    (&profile).into(),
                    format!("k={k}"),
                    round_trip,
                ));
                let alphas = sample_alphas(p, profile.lift_digits());
                report.extend(suites::verify(&loaded, &engine, &alphas).certificates);
            }
        }
        self.emit_report(&report);
        Ok(report)
    }
}
