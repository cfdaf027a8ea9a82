use crate::commands::{report_schedule, REPORT_HORIZON};
use crate::config::{ScheduleConfig, Settings};
use crate::error::{CliError, CliResult};
use crate::output::OutDir;

pub fn run(cfg: &ScheduleConfig, settings: &Settings) -> CliResult<()> {
    let schedule = settings
        .schedule
        .ok_or_else(|| CliError::Config("validate-schedule needs a `schedule`".into()))?;
    let eta = cfg.eta.unwrap_or(f64::INFINITY);
    let out = OutDir::create(settings.outdir.clone())?;
    let file = report_schedule(&out, &schedule, cfg.mu, eta, cfg.horizon.unwrap_or(REPORT_HORIZON), None)?;
    let r = &file.report;
    println!("limsup_estimate  {:.16e}", r.limsup_estimate);
    println!("condition_fbf_ep {}", r.condition_fbf_ep);
    println!("condition_fbf    {}", r.condition_fbf);
    println!("in_l2_not_l1     {}", r.in_l2_not_l1);
    Ok(())
}
