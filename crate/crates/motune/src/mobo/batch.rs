/// Adaptive batch size: enough evaluations per iteration that the previous
/// iteration's overhead stays below the desired fraction of simulation time,
/// never fewer than one.
pub fn calc_batch_size(t_overhead_prev: f64, t_sim_prev: f64, p_des: f64) -> usize {
    assert!(t_sim_prev > 0.0, "mean evaluation time must be positive");
    assert!(p_des > 0.0, "desired overhead fraction must be positive");
    assert!(t_overhead_prev >= 0.0);
    ((t_overhead_prev / (p_des * t_sim_prev)).ceil() as usize).max(1)
}
