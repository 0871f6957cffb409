use std::fs;

use serde_json::json;
use slpinn::checks::{
    self, all_passed, cancellation_check, gradient_checks, loss_scaling_checks, manufactured_checks, rate_suite,
    structural_wall_checks, CheckOutcome, SLOPE_CSV_HEADER,
};
use slpinn::problem::U1Form;

use crate::train::{unix_now, write_manifest};
use crate::{CliResult, Failure, RatesArgs, VerifyArgs};

fn report(section: &str, outcomes: &[CheckOutcome], failed: &mut Vec<String>) {
    println!("== {section}");
    for c in outcomes {
        println!("{c}");
        if !c.passed {
            failed.push(c.name.clone());
        }
    }
}

pub fn run_verify(args: VerifyArgs) -> CliResult {
    let mut failed = Vec::new();

    report("manufactured solution", &manufactured_checks(&args.eps, U1Form::Corrected)?, &mut failed);
    // The uncorrected u1 must be rejected by the same gate.
    let printed = manufactured_checks(&args.eps[..1], U1Form::Printed)?;
    let guard = CheckOutcome {
        name: "uncorrected u1 form rejected".into(),
        value: printed[0].value,
        limit: printed[0].limit,
        passed: !all_passed(&printed),
    };
    report("manufactured guard", &[guard], &mut failed);

    report("gradients", &gradient_checks(1e-4, args.gradient_draws, 1)?, &mut failed);
    report("cancellation", &cancellation_check(&[1e-4, 1e-8], args.draws, 2)?, &mut failed);
    report("loss scaling", &loss_scaling_checks(1e-4, 0)?, &mut failed);
    report("wall conditions", &structural_wall_checks(&args.eps, args.draws, 3)?, &mut failed);

    if failed.is_empty() {
        println!("all checks passed");
        Ok(())
    } else {
        Err(Failure::Verification(format!("failed checks: {}", failed.join(", "))))
    }
}

pub fn run_rates(args: RatesArgs) -> CliResult {
    let started = unix_now();
    let rows = rate_suite(&args.eps)?;
    fs::create_dir_all(&args.out)?;
    let mut csv = format!("{SLOPE_CSV_HEADER}\n");
    for r in &rows {
        csv.push_str(&r.csv_line());
        csv.push('\n');
    }
    let path = args.out.join("rates.csv");
    fs::write(&path, &csv)?;
    print!("{csv}");
    write_manifest(
        &args.out.join("rates_manifest.json"),
        json!({
            "command": "rates",
            "eps_list": args.eps,
            "weak_limit_psi": checks::WEAK_LIMIT_PSI.iter().map(|(l, _)| *l).collect::<Vec<_>>(),
            "outputs": [path],
            "started_unix": started,
        }),
    )?;
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("{} {}", r.check, r.parameter))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("slopes outside their windows: {}", failed.join(", "))))
    }
}
