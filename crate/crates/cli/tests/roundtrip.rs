use ffscale_cli::scenario::{GridBlock, Scenario};
use ffscale_core::initial::InitialCondition;
use ffscale_core::{Axis, Boundary, ProfileKind, SpeedProfile};
use proptest::prelude::*;

fn base() -> Scenario {
    Scenario::from_toml_str(
        r#"
name = "rt"
run_kind = "schrodinger_ff_potential"
[time]
dt = 0.01
n_steps = 10
"#,
    )
    .unwrap()
}

proptest! {
    #[test]
    fn resolved_scenarios_reparse_identically(
        x_min in -50.0f64..0.0,
        len in 1.0f64..100.0,
        n in 8usize..5000,
        periodic in any::<bool>(),
        dt in 1e-6f64..1.0,
        steps in 1usize..100_000,
        start in -3.0f64..3.0,
        end in -3.0f64..3.0,
        center in -5.0f64..5.0,
        width in 1e-3f64..5.0,
        tol in proptest::option::of(1e-12f64..1.0),
    ) {
        let mut s = base();
        s.tolerance = tol;
        s.grid = Some(GridBlock {
            x_min,
            x_max: x_min + len,
            n_points: n,
            boundary: if periodic { Boundary::Periodic } else { Boundary::FixedZero },
        });
        s.time.dt = dt;
        s.time.n_steps = steps;
        s.profile = Some(SpeedProfile::new(ProfileKind::LinearRamp { start, end }, Axis::Time, dt * steps as f64).unwrap());
        s.initial = Some(InitialCondition::Gaussian { center, width, momentum: start });
        let resolved = s.resolved();
        let text = resolved.to_toml();
        prop_assert_eq!(Scenario::from_toml_str(&text).unwrap(), resolved);
    }
}
