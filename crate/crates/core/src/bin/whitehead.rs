use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use whitehead::fatwedge::{omega_nontriviality, retraction_obstruction, ring, SphereTuple};
use whitehead::scenario::Fixture;
use whitehead::whitehead::{
    evaluate, indeterminacy, known_results, lower_products_vanish, triple_coset_constraints, ProductSpec,
    ProductStatus, Query,
};
use whitehead::{parse, Error, NormalForm, RelationDB, Step};

#[derive(Parser)]
#[command(name = "whitehead", version, about = "Whitehead products in homotopy groups of spheres")]
struct Cli {
    /// Relations file to use instead of the shipped one.
    #[arg(long, global = true)]
    relations: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Print the rewrite steps.
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Normalize an expression such as "[eta_4, eta_4^2]".
    Eval { expr: String },
    /// Run a pinned scenario, or every scenario with `all`.
    Scenario { name: String },
    /// Status, indeterminacy and constraints of w[f_1, ..., f_r].
    Product {
        #[arg(required = true, num_args = 2..)]
        factors: Vec<String>,
    },
    /// Look up a known result: cp:R, hp:R or baues:M1,M2,...
    Known { query: String },
    /// Cohomology of T_a/T_b for a product of spheres.
    Fatwedge {
        #[arg(long)]
        r: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<u32>,
        /// a,b; defaults to 0,r-1.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
        #[arg(long)]
        obstruction: bool,
        #[arg(long)]
        omega: bool,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Syntax { .. } | Error::RelFile { .. } | Error::UnknownQuery(_) | Error::UnknownScenario(_) => 1,
        Error::Io(_) => 4,
        Error::Undetermined(_) | Error::StepLimit(_) => 3,
        _ => 2,
    }
}

fn print_trace(trace: &[Step]) {
    for s in trace {
        let src = s.provenance.as_deref().map(|p| format!("  [{p}]")).unwrap_or_default();
        println!("  {}: {} => {}{src}", s.rule, s.before, s.after);
    }
}

fn emit(cli: &Cli, value: serde_json::Value, text: impl FnOnce()) {
    if cli.format == Format::Json {
        println!("{}", serde_json::to_string_pretty(&value).expect("json"));
    } else {
        text();
    }
}

fn status_line(st: &ProductStatus) -> String {
    match st {
        ProductStatus::Empty { witness } => format!("empty: {} = {}", witness.product, witness.value),
        ProductStatus::ContainsZero { reason } => format!("contains 0: {reason}"),
        ProductStatus::NonEmpty { reason } => format!("defined: {reason}"),
        ProductStatus::Coset { rendered, .. } => format!("coset {rendered}"),
        ProductStatus::ConstrainedCoset { family, constraints } => {
            let mut out = format!("representatives mod J: {}", family.rendered.join(", "));
            for n in &constraints.notes {
                out += &format!("\n  {n}");
            }
            out
        }
        ProductStatus::Undetermined { reason } => format!("undetermined: {reason}"),
    }
}

fn run(cli: &Cli) -> Result<u8, Error> {
    let owned;
    let db: &RelationDB = match &cli.relations {
        Some(p) => {
            owned = RelationDB::load(p)?;
            &owned
        }
        None => RelationDB::shipped(),
    };
    match &cli.cmd {
        Cmd::Eval { expr } => {
            let e = parse(expr)?;
            let (nf, trace) = evaluate(&e, db)?;
            let residue = matches!(nf, NormalForm::Residue { .. });
            emit(
                cli,
                json!({ "input": expr, "result": nf, "trace": if cli.trace { json!(trace) } else { json!(null) } }),
                || {
                    if cli.trace {
                        print_trace(&trace);
                    }
                    match &nf {
                        NormalForm::Resolved { rendered, .. } => println!("{rendered}"),
                        NormalForm::Residue { rendered, reason, .. } => println!("residue: {rendered}\n  {reason}"),
                    }
                },
            );
            Ok(if residue { 3 } else { 0 })
        }
        Cmd::Scenario { name } => {
            let fixture = Fixture::shipped();
            let names: Vec<&str> = if name == "all" { fixture.names() } else { vec![fixture.get(name)?.name.as_str()] };
            let mut results = Vec::new();
            for n in names {
                results.push(fixture.get(n)?.run(db)?);
            }
            let all_pass = results.iter().all(|r| r.pass);
            let value = if results.len() == 1 { json!(results[0]) } else { json!(results) };
            emit(cli, value, || {
                for r in &results {
                    print!("{r}");
                    if cli.trace {
                        print_trace(&r.trace);
                    }
                }
            });
            Ok(if all_pass { 0 } else { 5 })
        }
        Cmd::Product { factors } => {
            let items: Vec<&str> = factors.iter().map(String::as_str).collect();
            let spec = ProductSpec::parse(&items, db)?;
            let mut status = lower_products_vanish(&spec, db)?;
            let mut order = None;
            if !matches!(status, ProductStatus::Empty { .. }) {
                if spec.r() == 3 {
                    status = triple_coset_constraints(&spec, db)?;
                }
                if let Ok(ind) = indeterminacy(&spec, db) {
                    order = Some(ind.subgroup.order);
                }
            }
            let undetermined = matches!(status, ProductStatus::Undetermined { .. });
            emit(cli, json!({ "factors": factors, "status": status, "indeterminacy_order": order }), || {
                println!("w[{}]", factors.join(", "));
                println!("  {}", status_line(&status));
                match order {
                    Some(Some(o)) => println!("  |J| = {o}"),
                    Some(None) => println!("  J is infinite"),
                    None => {}
                }
            });
            Ok(if undetermined { 3 } else { 0 })
        }
        Cmd::Known { query } => {
            let q: Query = query.parse()?;
            let res = known_results(&q, db)?;
            emit(cli, json!(res), || match &res {
                whitehead::whitehead::KnownResult::Element { rendered, provenance, .. } => {
                    println!("{rendered}  [{provenance}]")
                }
                whitehead::whitehead::KnownResult::Status { status, provenance } => {
                    println!("{}  [{provenance}]", status_line(status))
                }
            });
            Ok(0)
        }
        Cmd::Fatwedge { r, dims, levels, obstruction, omega } => {
            if dims.len() != *r {
                return Err(Error::Invalid(format!("--r {r} but {} dimensions given", dims.len())));
            }
            let tuple = SphereTuple::new(dims.clone())?;
            if *obstruction || *omega {
                let w = if *obstruction { retraction_obstruction(&tuple) } else { omega_nontriviality(&tuple) };
                emit(cli, json!({ "dims": dims, "witness": w }), || match &w {
                    Some(w) => println!("{w}"),
                    None => println!("no witness"),
                });
                return Ok(0);
            }
            let (a, b) = match levels.as_deref() {
                Some([a, b]) => (*a, *b),
                _ => (0, r - 1),
            };
            let q = ring(a, b, &tuple)?;
            let betti: std::collections::BTreeMap<String, usize> =
                q.betti().into_iter().map(|(d, k)| (d.to_string(), k)).collect();
            emit(cli, json!({ "ring": q, "rank": q.rank(), "betti": betti }), || print!("{q}"));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
