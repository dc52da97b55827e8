use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};
use tensor_moments::counting::{
    count_dyck, count_melonic_maps, count_noncrossing_div, fuss_catalan,
};
use tensor_moments::experiments::{
    contraction_experiment, exact_moment, fmt_float, heavy_tail_experiment, lemma_tree_table,
    matrix_resolvent_check, mc_moments, variance_scaling, write_table, CsvRow, ExperimentConfig,
    MomentEstimate,
};
use tensor_moments::hypergraph::{is_melonic_dual, is_melonic_recursive};
use tensor_moments::limitlaw::{density, moment, omega_c};
use tensor_moments::maps::{enumerate_rooted_connected, Permutation};
use tensor_moments::tensor::EntryDistribution;
use tensor_moments::{Error, Result};

#[derive(Parser)]
#[command(
    name = "tmoments",
    version,
    about = "Moments of symmetric random tensors"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Tensor order.
    #[arg(long, global = true)]
    p: Option<usize>,

    /// Number of vertices (moment degree); the largest one for sampling runs.
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Dimensions, comma separated.
    #[arg(long = "N", global = true, value_delimiter = ',')]
    dims: Vec<usize>,

    #[arg(long, global = true)]
    samples: Option<usize>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true)]
    threads: Option<usize>,

    /// gaussian-gote | gaussian-offdiag-only | rademacher | uniform | pareto:<alpha>
    #[arg(long, global = true)]
    dist: Option<EntryDistribution>,

    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// JSON experiment configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the rooted connected p-regular maps with n vertices.
    Enumerate,
    /// Melonic flags of every map; with --N, exact E[Tr_b]/N per map.
    Classify,
    /// Fuss-Catalan numbers and the objects they count, up to n.
    Count,
    /// Limit moments up to n; with --exact, exact finite-N values too.
    Moments {
        #[arg(long)]
        exact: bool,
    },
    /// Monte Carlo estimates of E[I_n/N].
    Mc,
    /// Variance of I_n/N across dimensions and its log-log slope.
    Var,
    /// Density of the limit law on a grid.
    Law {
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Moments of the contracted, rescaled tensor.
    Contract {
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Contract against a random unit vector rather than e1.
        #[arg(long)]
        random_unit: bool,
    },
    /// Medians and interquartile ranges with heavy-tailed entries.
    Heavytail,
    /// Truncated resolvent series against the dense trace for a matrix.
    ResolventCheck {
        #[arg(long, default_value_t = 3.0)]
        z: f64,
        /// Imaginary part of z.
        #[arg(long, default_value_t = 0.0)]
        zi: f64,
        #[arg(long = "K", default_value_t = 20)]
        k: usize,
    },
}

/// A rendered result: CSV header and rows, plus the JSON value.
struct Report {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    json: Value,
}

impl Report {
    fn from_estimates(est: &[MomentEstimate]) -> Result<Self> {
        Ok(Report {
            header: MomentEstimate::header().to_vec(),
            rows: est.iter().map(CsvRow::fields).collect(),
            json: serde_json::to_value(est)?,
        })
    }
}

fn perm(p: &Permutation) -> String {
    let parts: Vec<String> = p.image().iter().map(|x| x.to_string()).collect();
    parts.join(" ")
}

impl Cli {
    fn p(&self) -> usize {
        self.p.unwrap_or(3)
    }

    fn n(&self) -> usize {
        self.n.unwrap_or(2)
    }

    fn config(&self, default_grid: &[usize]) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => serde_json::from_reader(File::open(path)?)?,
            None => ExperimentConfig::new(3, 2, default_grid.to_vec(), 200, 0),
        };
        if let Some(p) = self.p {
            cfg.p = p;
        }
        if let Some(n) = self.n {
            cfg.n_max = n;
        }
        if !self.dims.is_empty() {
            cfg.n_grid = self.dims.clone();
        }
        if let Some(s) = self.samples {
            cfg.samples = s;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        if let Some(d) = self.dist {
            cfg.dist = d;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn run(&self) -> Result<Report> {
        match &self.cmd {
            Cmd::Enumerate => {
                let maps = enumerate_rooted_connected(self.p(), self.n())?;
                let mut rows = Vec::new();
                let mut json = Vec::new();
                for (i, b) in maps.iter().enumerate() {
                    let code: Vec<String> = b
                        .canonical_code()?
                        .as_slice()
                        .iter()
                        .map(|x| x.to_string())
                        .collect();
                    rows.push(vec![
                        i.to_string(),
                        perm(b.sigma()),
                        perm(b.tau()),
                        b.root().map_or(String::new(), |r| r.to_string()),
                        code.join(" "),
                    ]);
                    json.push(serde_json::to_value(b)?);
                }
                Ok(Report {
                    header: vec!["map", "sigma", "tau", "root", "code"],
                    rows,
                    json: Value::Array(json),
                })
            }
            Cmd::Classify if !self.dims.is_empty() => {
                let dist = self.dist.unwrap_or(EntryDistribution::GaussianGote);
                let rows = lemma_tree_table(self.p(), self.n(), &self.dims, dist)?;
                Ok(Report {
                    header: tensor_moments::experiments::MapLimitRow::header().to_vec(),
                    rows: rows.iter().map(CsvRow::fields).collect(),
                    json: serde_json::to_value(&rows)?,
                })
            }
            Cmd::Classify => {
                let maps = enumerate_rooted_connected(self.p(), self.n())?;
                let mut rows = Vec::new();
                let mut json = Vec::new();
                for (i, b) in maps.iter().enumerate() {
                    let rec = is_melonic_recursive(b)?;
                    let dual = if self.p() >= 3 {
                        is_melonic_dual(b)?.map(|pi| {
                            let blocks: Vec<String> = pi
                                .blocks()
                                .iter()
                                .map(|blk| {
                                    let e: Vec<String> =
                                        blk.iter().map(|x| x.to_string()).collect();
                                    e.join(" ")
                                })
                                .collect();
                            blocks.join("|")
                        })
                    } else {
                        None
                    };
                    rows.push(vec![
                        i.to_string(),
                        perm(b.tau()),
                        rec.to_string(),
                        dual.clone().unwrap_or_default(),
                    ]);
                    json.push(json!({"map": i, "tau": b.tau().image(), "melonic": rec, "partition": dual}));
                }
                Ok(Report {
                    header: vec!["map", "tau", "melonic", "partition"],
                    rows,
                    json: Value::Array(json),
                })
            }
            Cmd::Count => {
                let p = self.p();
                let mut rows = Vec::new();
                let mut json = Vec::new();
                for k in 0..=self.n() {
                    let vals = [
                        fuss_catalan(p as u64, k as u64),
                        count_dyck(p, k),
                        count_noncrossing_div(p, k),
                        count_melonic_maps(p as u64, k as u64),
                    ];
                    let mut row = vec![k.to_string()];
                    row.extend(vals.iter().map(|v| v.to_string()));
                    rows.push(row);
                    json.push(json!({
                        "k": k,
                        "fuss_catalan": vals[0].to_string(),
                        "dyck": vals[1].to_string(),
                        "noncrossing": vals[2].to_string(),
                        "melonic_maps_2k": vals[3].to_string(),
                    }));
                }
                Ok(Report {
                    header: vec![
                        "k",
                        "fuss_catalan",
                        "dyck",
                        "noncrossing",
                        "melonic_maps_2k",
                    ],
                    rows,
                    json: Value::Array(json),
                })
            }
            Cmd::Moments { exact } => {
                let p = self.p();
                let dist = self.dist.unwrap_or(EntryDistribution::GaussianGote);
                let grid = if self.dims.is_empty() {
                    vec![30]
                } else {
                    self.dims.clone()
                };
                let mut rows = Vec::new();
                let mut json = Vec::new();
                for n in 0..=self.n() {
                    let limit = moment(p, n);
                    if *exact && n > 0 {
                        for &dim in &grid {
                            let value = exact_moment(p, n, dim, dist)?;
                            rows.push(vec![
                                n.to_string(),
                                dim.to_string(),
                                limit.to_string(),
                                fmt_float(value),
                            ]);
                            json.push(json!({"n": n, "N": dim, "limit": limit.to_string(), "exact": value}));
                        }
                    } else {
                        rows.push(vec![
                            n.to_string(),
                            String::new(),
                            limit.to_string(),
                            String::new(),
                        ]);
                        json.push(json!({"n": n, "limit": limit.to_string()}));
                    }
                }
                Ok(Report {
                    header: vec!["n", "N", "limit", "exact"],
                    rows,
                    json: Value::Array(json),
                })
            }
            Cmd::Mc => Report::from_estimates(&mc_moments(&self.config(&[30])?)?),
            Cmd::Var => {
                let v = variance_scaling(&self.config(&[16, 32, 64])?)?;
                eprintln!("log-log slope of Var[I_{}/N]: {:.6}", v.n, v.slope);
                let mut report = Report::from_estimates(&v.rows)?;
                report.json = serde_json::to_value(&v)?;
                Ok(report)
            }
            Cmd::Law { points } => {
                let p = self.p();
                if *points == 0 {
                    return Err(Error::ContractViolation(
                        "need at least one grid point".into(),
                    ));
                }
                let w = omega_c(p);
                let mut rows = Vec::new();
                let mut json = Vec::new();
                for i in 0..*points {
                    let y = -w + (i as f64 + 0.5) * 2.0 * w / *points as f64;
                    let d = density(p, y)?;
                    rows.push(vec![fmt_float(y), fmt_float(d)]);
                    json.push(json!([y, d]));
                }
                Ok(Report {
                    header: vec!["y", "density"],
                    rows,
                    json: json!({"p": p, "support": w, "density": json}),
                })
            }
            Cmd::Contract { k, random_unit } => {
                let mut cfg = self.config(&[40])?;
                cfg.k = *k;
                cfg.random_unit |= *random_unit;
                Report::from_estimates(&contraction_experiment(&cfg)?)
            }
            Cmd::Heavytail => {
                let mut cfg = self.config(&[16, 32, 64])?;
                if self.dist.is_none() && self.config.is_none() {
                    // tail index strictly between p and p + 1
                    cfg.dist = EntryDistribution::SymmetrizedPareto {
                        alpha: cfg.p as f64 + 0.5,
                    };
                }
                Report::from_estimates(&heavy_tail_experiment(&cfg)?)
            }
            Cmd::ResolventCheck { z, zi, k } => {
                let dim = self.dims.first().copied().unwrap_or(50);
                let zc = Complex64::new(*z, *zi);
                let r = matrix_resolvent_check(dim, zc, *k, self.seed.unwrap_or(0))?;
                Ok(Report {
                    header: vec![
                        "N",
                        "z_re",
                        "z_im",
                        "K",
                        "series_re",
                        "series_im",
                        "direct_re",
                        "direct_im",
                        "gap",
                        "bound",
                    ],
                    rows: vec![vec![
                        dim.to_string(),
                        fmt_float(*z),
                        fmt_float(*zi),
                        k.to_string(),
                        fmt_float(r.series.re),
                        fmt_float(r.series.im),
                        fmt_float(r.direct.re),
                        fmt_float(r.direct.im),
                        fmt_float(r.gap),
                        fmt_float(r.bound),
                    ]],
                    json: serde_json::to_value(r)?,
                })
            }
        }
    }

    fn emit(&self, report: &Report) -> Result<()> {
        let sink: Box<dyn Write> = match &self.out {
            Some(path) => Box::new(File::create(path)?),
            None => Box::new(io::stdout().lock()),
        };
        match self.format {
            Format::Csv => write_table(&report.header, &report.rows, sink),
            Format::Json => {
                let mut sink = sink;
                serde_json::to_writer_pretty(&mut sink, &report.json)?;
                writeln!(sink)?;
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.run().and_then(|r| cli.emit(&r)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
