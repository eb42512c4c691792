//! Command-line harness over the built-in examples.

use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::ast::pretty;
use crate::error::{Error, Result};
use crate::json::{
    adt_decl_to_json, core_to_json, expr_to_json, parse_str, surface_type_from_json,
    surface_value_from_json, surface_value_to_json, trace_to_json, type_rep_from_json,
};
use crate::lower::{lower_expr, pretty_core};
use crate::programs::{example_registry, examples, find_example};
use crate::trace::enumerate_traces;
use crate::types::{AdtRegistry, SurfaceType, TypeRep};

#[derive(Parser, Debug)]
#[command(name = "embedded-match", version, about = "Inspect and run the built-in embedded programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List example programs.
    List,
    /// Print the matched program over parameter variables x0, x1, ...
    Dump {
        name: String,
        #[arg(long, value_enum, default_value_t = Format::Pretty)]
        format: Format,
    },
    /// Evaluate an example on a JSON array of host values.
    Eval {
        name: String,
        #[arg(long)]
        args: String,
    },
    /// Print the program after case lowering.
    Lower {
        name: String,
        #[arg(long, value_enum, default_value_t = Format::Pretty)]
        format: Format,
    },
    /// Enumerate the traces of an ADT name or a JSON type.
    Trace {
        ty: String,
        #[arg(long, value_enum, default_value_t = Format::Pretty)]
        format: Format,
    },
    /// Print the registered type declarations.
    Adts {
        #[arg(long, value_enum, default_value_t = Format::Pretty)]
        format: Format,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Pretty,
    Json,
}

/// Runs the CLI and returns the process exit code: 0 on success, 1 for
/// usage errors, 2 for evaluation and type errors.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let registry = example_registry();
    match dispatch(cli.command, &registry) {
        Ok(text) => {
            let _ = writeln!(out, "{text}");
            0
        }
        Err(e) => {
            let _ = writeln!(err, "{}", json!({"error": e.code(), "detail": e.to_string()}));
            match e {
                Error::UnknownExample(_) | Error::BadArgs(_) => 1,
                _ => 2,
            }
        }
    }
}

fn dispatch(command: Command, registry: &AdtRegistry) -> Result<String> {
    match command {
        Command::List => Ok(examples()
            .iter()
            .map(|e| {
                let args: Vec<String> = e.arg_types.iter().map(ToString::to_string).collect();
                format!("{}({}) -> {}: {}", e.name, args.join(", "), e.result_type, e.summary)
            })
            .collect::<Vec<_>>()
            .join("\n")),
        Command::Dump { name, format } => {
            let body = find_example(&name)?.body(registry)?;
            Ok(match format {
                Format::Pretty => pretty(&body),
                Format::Json => expr_to_json(&body).to_string(),
            })
        }
        Command::Eval { name, args } => {
            let ex = find_example(&name)?;
            let values = parse_args(&args)?;
            if values.len() != ex.arg_types.len() {
                return Err(Error::BadArgs(format!(
                    "`{name}` takes {} arguments, got {}",
                    ex.arg_types.len(),
                    values.len()
                )));
            }
            for (i, (v, t)) in values.iter().zip(&ex.arg_types).enumerate() {
                registry
                    .lift_at(v, t)
                    .map_err(|e| Error::BadArgs(format!("argument {i}: {e}")))?;
            }
            Ok(surface_value_to_json(&ex.run(&values, registry)?).to_string())
        }
        Command::Lower { name, format } => {
            let core = lower_expr(&find_example(&name)?.body(registry)?, registry)?;
            Ok(match format {
                Format::Pretty => pretty_core(&core),
                Format::Json => core_to_json(&core).to_string(),
            })
        }
        Command::Trace { ty, format } => {
            let rep = resolve_type(&ty, registry)?;
            let traces = enumerate_traces(&rep);
            Ok(match format {
                Format::Pretty => traces.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"),
                Format::Json => Value::Array(traces.iter().map(trace_to_json).collect()).to_string(),
            })
        }
        Command::Adts { format } => Ok(match format {
            Format::Pretty => registry
                .decls()
                .map(|d| {
                    let cons: Vec<String> = d
                        .constructors
                        .iter()
                        .map(|c| {
                            std::iter::once(c.name.clone())
                                .chain(c.fields.iter().map(ToString::to_string))
                                .collect::<Vec<_>>()
                                .join(" ")
                        })
                        .collect();
                    let rep = registry
                        .repr_of(&SurfaceType::Adt(d.name.clone()))
                        .map(|r| r.to_string())
                        .unwrap_or_default();
                    format!("data {} = {}\n  repr {rep}", d.name, cons.join(" | "))
                })
                .collect::<Vec<_>>()
                .join("\n"),
            Format::Json => Value::Array(registry.decls().map(adt_decl_to_json).collect()).to_string(),
        }),
    }
}

fn parse_args(text: &str) -> Result<Vec<crate::types::SurfaceValue>> {
    let bad = |e: Error| Error::BadArgs(e.to_string());
    let v = parse_str(text).map_err(bad)?;
    let items = v
        .as_array()
        .ok_or_else(|| Error::BadArgs("--args must be a JSON array".into()))?;
    items
        .iter()
        .map(|item| surface_value_from_json(item).map_err(bad))
        .collect()
}

/// An ADT name, a JSON type reference (`"f64"`, `{"adt": ..}`, `{"tuple": ..}`)
/// or a JSON representation type (`["pair", ..]`).
fn resolve_type(text: &str, registry: &AdtRegistry) -> Result<TypeRep> {
    if registry.contains(text) {
        return registry.repr_of(&SurfaceType::adt(text));
    }
    let v = parse_str(text).map_err(|_| Error::UnknownAdt(text.to_string()))?;
    if v.is_array() {
        return type_rep_from_json(&v);
    }
    registry.repr_of(&surface_type_from_json(&v)?)
}
