//! Apply each optical element to a small state and print the result.

use oamsim::elements::{Angle, Element};
use oamsim::{BasisState, Mode, PathId, PureState, Qubit};

fn main() -> oamsim::Result<()> {
    let (a, b, c) = (PathId(0), PathId(1), PathId(2));
    // a polarization-free dual-rail qubit on (a, b) plus a control photon on c
    let qubit = PureState::qubit(&Qubit::real(0.6, 0.8)?.on_paths(a, b))?;
    let input = qubit.tensor(&PureState::single_photon(c, 2)?);
    println!("input        {input}");

    let steps = [
        Element::Hologram { path: a, delta_ell: 3 },
        Element::DovePrism { path: a, alpha: Angle::pi_over(4) },
        Element::OamFlip { path: c },
        Element::DualRailCnot { control: c, target_a: a, target_b: b },
        Element::Beamsplitter { path_up: a, path_down: b },
    ];
    let mut s = input;
    for e in &steps {
        s = e.apply(&s)?;
        println!("{:<12} {s}", format!("{:?}", e.kind()));
    }

    // two photons meeting at a beamsplitter bunch
    let pair = PureState::basis(BasisState::from_modes([Mode { path: a, ell: 0 }, Mode { path: b, ell: 0 }]));
    let hom = Element::Beamsplitter { path_up: a, path_down: b }.apply(&pair)?;
    println!("HOM          {hom}");
    Ok(())
}
