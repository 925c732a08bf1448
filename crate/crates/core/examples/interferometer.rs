//! Route single photons through the OAM sorting interferometer for a few
//! values of K and show which output port lights up.

use oamsim::blocks::{sorting_interferometer, Trace};
use oamsim::{PathId, PureState};

fn main() -> oamsim::Result<()> {
    let (up, down) = (PathId(0), PathId(1));
    for k in [1, 2, 4] {
        println!("K = {k}");
        for ell in -4..=4 {
            let input = PureState::single_photon(up, ell)?;
            let out = sorting_interferometer(&input, up, down, k, &mut Trace::default())?;
            println!(
                "  ell {ell:>2}: P(up) = {:.3}  P(down) = {:.3}",
                out.marginal_path_probability(up),
                out.marginal_path_probability(down)
            );
        }
    }
    Ok(())
}
