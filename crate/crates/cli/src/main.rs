//! Command-line front end. Every subcommand is a thin adapter over the
//! library: parse, call, print. Results go to stdout (or --output), any
//! progress chatter goes to stderr, and exit codes distinguish bad input
//! (1) from an internal verification failure (2).

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sparsemul_core::{
    classify_prime, find_halforder_primes, find_primroot_3mod4_primes, generate_cyclic,
    mersenne_witness, min_weight_multiple, multiplicative_order, run_census, scan_restricted,
    sumset_growth, CensusOptions, ClassifyOptions, Error, MinTermsNeg1, PrimeRecord,
    WeightCertificate,
};

#[derive(Parser)]
#[command(
    name = "sparsemul",
    version,
    about = "Multiplicative orders, subgroup sumsets, sparse binary multiples, and prime censuses"
)]
struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write results to this file instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Progress reporting on stderr
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Jsonl,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Multiplicative order of r mod p, with the 2-adic split of p-1
    Order { r: u64, p: u64 },
    /// T1/T2 membership and order statistics for a single prime
    Classify {
        p: u64,
        /// Fill the minimal term count even for T2 members
        #[arg(long)]
        t6: bool,
    },
    /// Classify every prime up to x, in parallel
    Census {
        x: u64,
        /// Worker threads (default: SPARSEMUL_WORKERS or all cores)
        #[arg(long)]
        workers: Option<usize>,
        /// Resume file, rewritten after every completed chunk
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// List the exceptions that survive even six terms
        #[arg(long = "t6-exceptions")]
        t6_exceptions: bool,
    },
    /// Lightest binary multiple of p, as an explicit certificate
    Minweight {
        p: u64,
        /// Give up beyond this Hamming weight
        #[arg(long, default_value_t = 9)]
        cap: u32,
    },
    /// Print the sparse multiple of p in binary and hex
    Certificate {
        p: u64,
        #[arg(long, default_value_t = 9)]
        cap: u32,
    },
    /// Search the factors of 2^n - 1 for a weight-floor witness
    Mersenne { n: u32, k: u32 },
    /// Odd-order subgroups A with A+A short of F_p, for primes <= limit
    Restricted {
        a: u64,
        limit: u64,
        /// Keep only examples with |A| (ln p)^3 / p at least this
        #[arg(long, default_value_t = 0.0)]
        min_ratio: f64,
    },
    /// Primes with ord_p(a) = (p-1)/2 odd
    Halforder { a: u64, limit: u64 },
    /// Primes p = 3 mod 4 with 2 as a primitive root
    Primroot3mod4 { limit: u64 },
    /// |R|, |R+R|, and the growth ratio for R = <r> mod p
    Growth { r: u64, p: u64 },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_verification() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn open_output(path: &Option<PathBuf>) -> std::io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn worker_count(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("SPARSEMUL_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    .max(1)
}

fn mt_text(mt: MinTermsNeg1) -> &'static str {
    match mt {
        MinTermsNeg1::NotComputed => "-",
        MinTermsNeg1::ExceedsSix => ">6",
        MinTermsNeg1::Found(_) => "",
    }
}

/// Exponents largest-first, comma separated, matching the certificate text.
fn exps_desc(cert: &WeightCertificate) -> String {
    cert.exponents
        .iter()
        .rev()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn run(cli: Cli) -> sparsemul_core::Result<()> {
    let mut out = open_output(&cli.output)?;
    match cli.command {
        Command::Order { r, p } => {
            let o = multiplicative_order(r, p)?;
            match cli.format {
                Format::Table => writeln!(out, "ord={} s={} w={}", o.ord, o.s, o.w)?,
                Format::Jsonl => writeln!(
                    out,
                    "{{\"r\":{},\"p\":{},\"ord\":{},\"s\":{},\"w\":{},\"pm1_factors\":\"{}\"}}",
                    r, p, o.ord, o.s, o.w, o.pm1_factors
                )?,
                Format::Csv => {
                    writeln!(out, "r,p,ord,s,w")?;
                    writeln!(out, "{},{},{},{},{}", r, p, o.ord, o.s, o.w)?;
                }
            }
        }
        Command::Classify { p, t6 } => {
            let rec = classify_prime(p, ClassifyOptions { compute_t6: t6 })?;
            match cli.format {
                Format::Jsonl => writeln!(out, "{}", rec.to_jsonl())?,
                Format::Table => match &rec {
                    PrimeRecord::Skipped { p } => writeln!(out, "p={p} skipped")?,
                    PrimeRecord::Row(r) => {
                        let mt = match r.min_terms_neg1 {
                            MinTermsNeg1::Found(k) => k.to_string(),
                            other => mt_text(other).to_string(),
                        };
                        writeln!(
                            out,
                            "p={} ord2={} s={} w={} t1={} t2={} mt={}",
                            r.p, r.ord2, r.s, r.w, r.in_t1, r.in_t2, mt
                        )?;
                    }
                },
                Format::Csv => {
                    writeln!(out, "p,ord2,s,w,t1,t2,mt")?;
                    match &rec {
                        PrimeRecord::Skipped { p } => writeln!(out, "{p},,,,,,")?,
                        PrimeRecord::Row(r) => {
                            let mt = match r.min_terms_neg1 {
                                MinTermsNeg1::NotComputed => String::new(),
                                MinTermsNeg1::Found(k) => k.to_string(),
                                MinTermsNeg1::ExceedsSix => ">6".into(),
                            };
                            writeln!(
                                out,
                                "{},{},{},{},{},{},{}",
                                r.p, r.ord2, r.s, r.w, r.in_t1, r.in_t2, mt
                            )?;
                        }
                    }
                }
            }
        }
        Command::Census {
            x,
            workers,
            checkpoint,
            t6_exceptions,
        } => {
            let opts = CensusOptions {
                workers: worker_count(workers),
                compute_t6: false,
                chunk_span: None,
                progress: cli.verbose,
            };
            let report = if cli.format == Format::Jsonl {
                let mut write_err: Option<std::io::Error> = None;
                let mut sink = |rec: &PrimeRecord| {
                    if write_err.is_none() {
                        if let Err(e) = writeln!(out, "{}", rec.to_jsonl()) {
                            write_err = Some(e);
                        }
                    }
                };
                let report = run_census(x, &opts, checkpoint.as_deref(), Some(&mut sink))?;
                if let Some(e) = write_err {
                    return Err(e.into());
                }
                if cli.verbose {
                    eprint!("{}", report.to_table());
                }
                report
            } else {
                let report = run_census(x, &opts, checkpoint.as_deref(), None)?;
                match cli.format {
                    Format::Table => write!(out, "{}", report.to_table())?,
                    Format::Csv => write!(out, "{}", report.to_csv())?,
                    Format::Jsonl => unreachable!(),
                }
                report
            };
            if t6_exceptions {
                let stubborn: Vec<String> = report
                    .tally
                    .t2_exceptions
                    .iter()
                    .filter(|e| e.min_terms.is_none())
                    .map(|e| e.p.to_string())
                    .collect();
                writeln!(out, "t6 exception primes: {}", stubborn.join(" "))?;
            }
        }
        Command::Minweight { p, cap } => match min_weight_multiple(p, cap)? {
            Some(cert) => match cli.format {
                Format::Table => writeln!(
                    out,
                    "weight={} value={:#X}={}={}\u{b7}{}",
                    cert.weight, cert.value, cert.value, cert.cofactor, cert.p
                )?,
                Format::Jsonl => writeln!(
                    out,
                    "{{\"p\":{},\"weight\":{},\"exps\":[{}],\"value\":\"{:#X}\",\"cofactor\":\"{}\"}}",
                    cert.p,
                    cert.weight,
                    exps_desc(&cert),
                    cert.value,
                    cert.cofactor
                )?,
                Format::Csv => {
                    writeln!(out, "p,weight,exponents,value_hex,cofactor")?;
                    writeln!(
                        out,
                        "{},{},{},{:#X},{}",
                        cert.p,
                        cert.weight,
                        exps_desc(&cert).replace(',', ";"),
                        cert.value,
                        cert.cofactor
                    )?;
                }
            },
            None => match cli.format {
                Format::Jsonl => writeln!(out, "{{\"p\":{p},\"exceeds_cap\":{cap}}}")?,
                _ => writeln!(out, "exceeds cap: every multiple of {p} has weight > {cap}")?,
            },
        },
        Command::Certificate { p, cap } => match min_weight_multiple(p, cap)? {
            Some(cert) => match cli.format {
                Format::Table => {
                    writeln!(out, "{cert}")?;
                    writeln!(out, "binary {}", cert.value.to_str_radix(2))?;
                }
                Format::Jsonl => writeln!(
                    out,
                    "{{\"p\":{},\"weight\":{},\"exps\":[{}],\"value_hex\":\"{:#X}\",\"value_bin\":\"{}\",\"cofactor\":\"{}\"}}",
                    cert.p,
                    cert.weight,
                    exps_desc(&cert),
                    cert.value,
                    cert.value.to_str_radix(2),
                    cert.cofactor
                )?,
                Format::Csv => {
                    writeln!(out, "p,weight,exponents,value_hex,value_bin,cofactor")?;
                    writeln!(
                        out,
                        "{},{},{},{:#X},{},{}",
                        cert.p,
                        cert.weight,
                        exps_desc(&cert).replace(',', ";"),
                        cert.value,
                        cert.value.to_str_radix(2),
                        cert.cofactor
                    )?;
                }
            },
            None => writeln!(out, "exceeds cap: every multiple of {p} has weight > {cap}")?,
        },
        Command::Mersenne { n, k } => {
            let w = mersenne_witness(n, k)?;
            let witness = w
                .witness_q
                .map(|q| q.to_string())
                .unwrap_or_else(|| "none".into());
            let floor = w
                .verified_weight_floor
                .map(|f| f.to_string())
                .unwrap_or_else(|| "none".into());
            match cli.format {
                Format::Table => writeln!(
                    out,
                    "n={} k={} factors={} omega={} condition={} witness={} floor={}",
                    w.n, w.k, w.factors, w.omega, w.condition_holds, witness, floor
                )?,
                Format::Jsonl => writeln!(
                    out,
                    "{{\"n\":{},\"k\":{},\"factors\":\"{}\",\"omega\":{},\"condition\":{},\"witness\":{},\"floor\":{}}}",
                    w.n,
                    w.k,
                    w.factors,
                    w.omega,
                    w.condition_holds,
                    w.witness_q
                        .map(|q| q.to_string())
                        .unwrap_or_else(|| "null".into()),
                    w.verified_weight_floor
                        .map(|f| f.to_string())
                        .unwrap_or_else(|| "null".into())
                )?,
                Format::Csv => {
                    writeln!(out, "n,k,factors,omega,condition,witness,floor")?;
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        w.n, w.k, w.factors, w.omega, w.condition_holds, witness, floor
                    )?;
                }
            }
        }
        Command::Restricted {
            a,
            limit,
            min_ratio,
        } => {
            let scan = scan_restricted(a, limit, min_ratio)?;
            if !scan.a_squarefree {
                eprintln!(
                    "warning: a={a} is not square-free; the construction is stated for square-free bases"
                );
            }
            match cli.format {
                Format::Csv | Format::Table => {
                    writeln!(out, "p,a,s,w,size_a,size_2a,zero_in_2a,ratio")?;
                    for ex in &scan.examples {
                        writeln!(
                            out,
                            "{},{},{},{},{},{},{},{:.6}",
                            ex.p,
                            ex.a,
                            ex.s,
                            ex.w,
                            ex.size_a,
                            ex.size_2a,
                            ex.zero_in_2a,
                            ex.size_ratio
                        )?;
                    }
                }
                Format::Jsonl => {
                    for ex in &scan.examples {
                        writeln!(
                            out,
                            "{{\"p\":{},\"a\":{},\"s\":{},\"w\":{},\"size_a\":{},\"size_2a\":{},\"zero_in_2a\":{},\"ratio\":{:.6}}}",
                            ex.p,
                            ex.a,
                            ex.s,
                            ex.w,
                            ex.size_a,
                            ex.size_2a,
                            ex.zero_in_2a,
                            ex.size_ratio
                        )?;
                    }
                }
            }
        }
        Command::Halforder { a, limit } => {
            let primes = find_halforder_primes(a, limit);
            write_prime_list(&mut out, cli.format, &primes, Some(a), limit)?;
        }
        Command::Primroot3mod4 { limit } => {
            let primes = find_primroot_3mod4_primes(limit);
            write_prime_list(&mut out, cli.format, &primes, None, limit)?;
        }
        Command::Growth { r, p } => {
            let g = generate_cyclic(r, p)?;
            let stats = sumset_growth(&g)?;
            match cli.format {
                Format::Table => writeln!(
                    out,
                    "size_r={} size_2r={} ratio={:.6}",
                    stats.size_r, stats.size_2r, stats.ratio_to_8_5
                )?,
                Format::Jsonl => writeln!(
                    out,
                    "{{\"r\":{},\"p\":{},\"size_r\":{},\"size_2r\":{},\"ratio_to_8_5\":{:.6}}}",
                    r, p, stats.size_r, stats.size_2r, stats.ratio_to_8_5
                )?,
                Format::Csv => {
                    writeln!(out, "r,p,size_r,size_2r,ratio_to_8_5")?;
                    writeln!(
                        out,
                        "{},{},{},{},{:.6}",
                        r, p, stats.size_r, stats.size_2r, stats.ratio_to_8_5
                    )?;
                }
            }
        }
    }
    Ok(())
}

fn write_prime_list(
    out: &mut dyn Write,
    format: Format,
    primes: &[u64],
    a: Option<u64>,
    limit: u64,
) -> sparsemul_core::Result<()> {
    match format {
        Format::Table => {
            for p in primes {
                writeln!(out, "{p}").map_err(Error::from)?;
            }
        }
        Format::Jsonl => {
            let list = primes
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(",");
            match a {
                Some(a) => writeln!(out, "{{\"a\":{a},\"limit\":{limit},\"primes\":[{list}]}}")
                    .map_err(Error::from)?,
                None => writeln!(out, "{{\"limit\":{limit},\"primes\":[{list}]}}")
                    .map_err(Error::from)?,
            }
        }
        Format::Csv => {
            writeln!(out, "p").map_err(Error::from)?;
            for p in primes {
                writeln!(out, "{p}").map_err(Error::from)?;
            }
        }
    }
    Ok(())
}
