from .grid_fn import GridFn, Tolerance, grid_points, shift_steps, check_unit_interval
from .calculus import (
    integrate,
    cumulative_integral,
    divided_difference,
    upper_derivative_estimate,
    lower_derivative_estimate,
    one_sided_differences,
    total_variation,
    variation_growth,
)
