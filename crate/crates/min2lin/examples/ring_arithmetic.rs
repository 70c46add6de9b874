//! Division with remainder, extended gcd and single-equation solving over
//! the integers, the rationals and a prime field.

use min2lin::ring::{EuclideanDomain, Integers, PrimeField, Rationals};

fn show<D: EuclideanDomain>(d: &D, a: &str, b: &str, c: &str) {
    let (a, b, c) = (d.parse_elem(a).unwrap(), d.parse_elem(b).unwrap(), d.parse_elem(c).unwrap());
    let (q, r) = d.divmod(&a, &b).unwrap();
    let (g, s, t) = d.ext_gcd(&a, &b);
    println!("over {d}: {a} = {b}·{q} + {r}; gcd = {g} = {s}·{a} + {t}·{b}");
    match d.solve_single(&a, &b, &c) {
        Some(sol) => println!(
            "  {a}x + {b}y = {c}: x = {} + {}r, y = {} + {}r",
            sol.x0, sol.stride_x, sol.y0, sol.stride_y
        ),
        None => println!("  {a}x + {b}y = {c} has no solution"),
    }
}

fn main() {
    show(&Integers, "9", "4", "3");
    show(&Integers, "6", "10", "3");
    show(&Rationals, "3/4", "2", "1/2");
    show(&PrimeField::new(7).unwrap(), "3", "5", "1");
}
