//! Load a run configuration and execute one verification suite in-process.
//!
//! cargo run --release --example run_config -- configs/default.conf norms

use bergman::config::RunConfig;
use bergman::verify::{self, Suite};
use clap::ValueEnum;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "configs/default.conf".into());
    let suite = Suite::from_str(&args.next().unwrap_or_else(|| "norms".into()), true).map_err(anyhow::Error::msg)?;
    let cfg = RunConfig::load(path.as_ref())?;
    cfg.validate()?;
    for row in verify::run(&cfg, suite)? {
        println!("{:<5} {:<48} {:>14.6e}  {}", if row.pass { "ok" } else { "FAIL" }, row.check, row.value, row.band);
    }
    Ok(())
}
