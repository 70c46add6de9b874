//! Building a system, composing a path into one equation and solving.

use min2lin::ring::Integers;
use min2lin::system::{compose_path, homogenize, is_flexible, solve, LinSystem};

fn main() {
    let mut s = LinSystem::new(Integers);
    let (x, y, z) = (s.add_var("x"), s.add_var("y"), s.add_var("z"));
    s.push_i64(x, z, 1, -2, 2, 1);
    s.push_i64(z, y, 1, -1, 1, 1);
    let e = compose_path(&s, &[0, 1]).unwrap();
    println!("x - 2z = 2 and z - y = 1 imply {}·x + {}·y = {}", e.a, e.b, e.c);

    let asg = solve(&s).expect("a path is consistent");
    println!("flexible: {}, one solution: x={}, y={}, z={}", is_flexible(&s), asg[x], asg[y], asg[z]);

    let (h, sub) = homogenize(&s, &asg).unwrap();
    println!("homogeneous after shifting by that solution: {}", h.is_homogeneous());
    let back = sub.pull_back(&s.domain, &solve(&h).unwrap());
    println!("pulled back: {back:?}");

    // y - 2x = 1 forces y odd, y - 2z = 0 forces it even.
    let mut t = LinSystem::new(Integers);
    let (x, y, z) = (t.add_var("x"), t.add_var("y"), t.add_var("z"));
    t.push_i64(y, x, 1, -2, 1, 1);
    t.push_i64(y, z, 1, -2, 0, 1);
    println!("y - 2x = 1, y - 2z = 0 consistent: {}", solve(&t).is_some());
}
