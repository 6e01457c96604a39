use pyo3::ffi::c_str;
use pyo3::prelude::*;

use slms_rl1_py::slms_rl1_module;

fn run(code: &std::ffi::CStr) {
    Python::attach(|py| {
        if let Err(e) = py.run(code, None, None) {
            e.print(py);
            panic!("python code failed");
        }
    });
}

#[test]
fn module_from_python() {
    pyo3::append_to_inittab!(slms_rl1_module);
    Python::initialize();
    run(c_str!(
        r#"
import slms_rl1 as s
cfg = s.FilterConfig("SLMS_RL1", 0.01, 0.1, 0.05)
w, prev = s.step([0.5, -0.2], [0.4, -0.1], [1.0, -1.0], 0.4, cfg)
assert abs(w[0] - (0.49 - 0.001 / 0.45)) < 1e-12, w
assert abs(w[1] - (-0.19 + 0.001 / 0.15)) < 1e-12, w
assert s.sgn(0.0) == 0.0
assert abs(s.analytic_variance(0.1, 0.1, 400.0) - 4.09) < 1e-9
assert sum(t != 0 for t in s.generate_channel(80, 8, 1)) == 8
try:
    s.select_lambda([(10.0, 4, 3.0, False)])
    raise AssertionError("no error")
except s.SelectionInfeasible:
    pass
try:
    s.compare_algorithms("Q")
    raise AssertionError("no error")
except ValueError:
    pass
"#
    ));
}
