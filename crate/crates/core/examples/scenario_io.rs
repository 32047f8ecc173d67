//! Build a scenario in code, save it, load it back, and show what validation
//! rejects.
//!
//! cargo run --example scenario_io

use coustic::model::{load_scenario, save_scenario};
use coustic::{DeviceBid, Error, Scenario, TaskBid};

fn main() -> coustic::Result<()> {
    let s = Scenario {
        resource_types: 2,
        alpha: 0.01,
        beta: 0.05,
        tasks: vec![TaskBid {
            id: "camera".into(),
            demand: vec![12.0, 4.0],
            valuation: 9.0,
        }],
        devices: vec![
            DeviceBid {
                id: "phone".into(),
                supply: vec![8.0, 2.0],
                capacity: 2,
                cost: 1.0,
            },
            DeviceBid {
                id: "tablet".into(),
                supply: vec![6.0, 6.0],
                capacity: 1,
                cost: 1.5,
            },
        ],
    };
    let text = save_scenario(&s)?;
    print!("{text}");
    assert_eq!(load_scenario(&text)?, s);

    let mut bad = s.clone();
    bad.devices[1].id = "phone".into();
    bad.tasks[0].demand = vec![0.0, 0.0];
    match save_scenario(&bad) {
        Err(Error::Invalid(violations)) => {
            for v in violations {
                println!("rejected: {v}");
            }
        }
        other => println!("unexpected: {other:?}"),
    }
    match load_scenario("{\"resource_types\": 2,\n \"tasks\": [}") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
