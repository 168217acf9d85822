use casimir_maps::circlemap::*;
use casimir_maps::trajectory::*;

fn main() {
    let m = TimeAdvanceMap::new(MirrorTrajectory::sine(0.34, 0.2, 0.3).unwrap()).unwrap();
    let s = find_periodic_orbit(&m, 1, 3).unwrap();
    let a = s.attracting.unwrap();
    let r = s.repelling.unwrap();
    println!("attracting points: {:?}", a.points);
    println!("multiplier {} cumulative_doppler {}", a.multiplier, a.cumulative_doppler);
    println!("repelling points: {:?}", r.points);
    println!("repelling multiplier {}", r.multiplier);
    println!("ln(Dq)/p = {}", a.cumulative_doppler.ln());
    // window [12 - a(12), 12 + a(12)] = [11.83, 12.17]: which attracting images fall inside?
    let a12 = m.trajectory().position(12.0);
    println!("a(12) = {a12}");
    for &tj in &a.points {
        for k in [11.0f64, 12.0] {
            let image = tj + k;
            if image >= 12.0 - a12 && image <= 12.0 + a12 {
                println!("  image {image} (phase {tj}) inside window");
            }
        }
    }
    // gaps between sorted phases
    let mut ph = a.points.clone(); ph.sort_by(f64::total_cmp);
    println!("sorted phases {:?} gaps {:?}", ph, [ph[1]-ph[0], ph[2]-ph[1], 1.0-ph[2]+ph[0]]);
}
