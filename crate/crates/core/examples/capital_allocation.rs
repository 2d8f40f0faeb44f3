//! Capital allocation by the extended gradient of a deviation measure.

use std::sync::Arc;

use devport::allocation::{allocation_robustness, capital_allocation, deviation_function};
use devport::envelope::build_mad;
use devport::geometry::SteinerConfig;
use devport::probspace::{FiniteProbSpace, RandomVariable};

fn main() -> devport::Result<()> {
    let space = Arc::new(FiniteProbSpace::uniform(3)?);
    let rho = deviation_function(&build_mad(space.clone())?)?;
    let desks = vec![
        RandomVariable::new(space.clone(), vec![-1.5, 0.0, 0.0])?,
        RandomVariable::new(space.clone(), vec![0.0, 0.0, 1.5])?,
    ];
    let cfg = SteinerConfig::default();
    let r = capital_allocation(&rho, &desks, &cfg)?;
    println!("total MAD {} split as {:?}", r.total_risk, r.contributions);
    for (d, k) in desks.iter().zip(&r.contributions) {
        println!("  standalone {} ≥ contribution {}", rho.eval(d.values())?, k);
    }

    let chk = allocation_robustness(&rho, desks[0].values(), &r.portfolio, 1e-4, 1000, &cfg)?;
    println!(
        "ball average {:.6} ± {:.2e} vs allocation {:.6}",
        chk.mean, chk.standard_error, chk.reference
    );
    Ok(())
}
