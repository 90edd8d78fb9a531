#!/usr/bin/env python

"""Box constrained interior-point refinement of grid search estimates."""

from collections import namedtuple
import warnings

import numpy as np
from scipy.optimize import Bounds, minimize
try:
    import cyipopt
except ImportError:
    try:  # releases before 1.0 were named ipopt
        import ipopt as cyipopt
    except ImportError:
        cyipopt = None

__all__ = ['BoundedRefinement', 'RefinementResult', 'refine']

RefinementResult = namedtuple('RefinementResult',
                              ['x', 'objective', 'initial_objective',
                               'iterations', 'history', 'method'])
RefinementResult.__doc__ = """The refined point, its objective value, the
objective at the start point, the solver iteration count, the objective value
recorded at each iteration and the solver used."""


class BoundedRefinement(object):
    """This class holds a smooth fit objective and box bounds in the form
    ipopt expects: an objective, its gradient and an empty set of general
    constraints. The objective value is recorded at every iteration.

    Parameters
    ==========
    fit : object
        Must provide ``value(x)`` returning a float and ``gradient(x)``
        returning an ndarray of shape(n,).
    lower : array_like, shape(n,)
        The lower bounds on x.
    upper : array_like, shape(n,)
        The upper bounds on x.
    tol : float, optional
        The convergence tolerance.

    """

    def __init__(self, fit, lower, upper, tol=1e-9):
        self.fit = fit
        self.lower_bound = np.asarray(lower, dtype=float)
        self.upper_bound = np.asarray(upper, dtype=float)
        self.num_free = self.lower_bound.size
        self.num_constraints = 0
        self.tol = tol
        self.obj_value = []

    def objective(self, free):
        """Returns the value of the objective function at free."""
        return self.fit.value(free)

    def gradient(self, free):
        """Returns the gradient of the objective function at free."""
        return self.fit.gradient(free)

    def constraints(self, free):
        """There are no general constraints, only bounds."""
        return np.zeros(0)

    def jacobianstructure(self):
        return (np.zeros(0, dtype=int), np.zeros(0, dtype=int))

    def jacobian(self, free):
        return np.zeros(0)

    def intermediate(self, *args):
        """This method is called at every optimization iteration. Not for
        public use."""
        self.obj_value.append(args[2])
        return True

    def _ipopt_problem(self):
        try:
            problem_class = cyipopt.Problem
        except AttributeError:
            problem_class = cyipopt.problem
        problem = problem_class(n=self.num_free, m=self.num_constraints,
                                problem_obj=self,
                                lb=self.lower_bound, ub=self.upper_bound,
                                cl=np.zeros(0), cu=np.zeros(0))
        try:
            add_option = problem.add_option
        except AttributeError:
            add_option = problem.addOption
        add_option('print_level', 0)
        add_option('sb', 'yes')
        add_option('tol', self.tol)
        add_option('acceptable_tol', self.tol)
        add_option('hessian_approximation', 'limited-memory')
        add_option('max_iter', 500)
        return problem

    def solve_ipopt(self, initial):
        """Returns the solution and the iteration count using ipopt."""
        problem = self._ipopt_problem()
        x, info = problem.solve(initial)
        return np.asarray(x, dtype=float), len(self.obj_value)

    def solve_scipy(self, initial):
        """Returns the solution and the iteration count using SciPy's
        trust-constr method, which runs an interior-point barrier method on
        the bounds, polished by L-BFGS-B, which holds the bounds exactly."""

        def record(xk, *args):
            self.obj_value.append(self.fit.value(xk))
            return False

        bounds = Bounds(self.lower_bound, self.upper_bound)
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', UserWarning)
            result = minimize(self.fit.value, initial, jac=self.fit.gradient,
                              method='trust-constr', bounds=bounds,
                              callback=record,
                              options={'xtol': self.tol,
                                       'gtol': self.tol,
                                       'barrier_tol': self.tol,
                                       'initial_barrier_parameter': self.tol,
                                       'initial_barrier_tolerance': self.tol,
                                       'maxiter': 1000})
        x = np.clip(result.x, self.lower_bound, self.upper_bound)
        polish = minimize(self.fit.value, x, jac=self.fit.gradient,
                          method='L-BFGS-B', bounds=bounds, callback=record,
                          options={'ftol': np.finfo(float).eps,
                                   'gtol': self.tol, 'maxiter': 1000})
        if polish.fun <= self.fit.value(x):
            x = polish.x
        return np.asarray(x, dtype=float), result.nit + polish.nit


def refine(fit, initial, window, lower=None, upper=None, tol=1e-9,
           method=None):
    """Returns the local minimizer of a fit objective within a box around an
    initial point.

    Parameters
    ==========
    fit : object
        Provides ``value(x)`` and ``gradient(x)``.
    initial : array_like, shape(n,)
        The start point, typically a grid search estimate.
    window : float or array_like, shape(n,)
        The half width of the search box around the start point.
    lower, upper : array_like, shape(n,), optional
        The admissible region; the search box is clipped to it.
    tol : float, optional
        Convergence tolerance of the solver.
    method : string, optional
        ``'ipopt'`` or ``'trust-constr'``. Defaults to ipopt when cyipopt is
        importable.

    Returns
    =======
    result : RefinementResult
        The objective at ``result.x`` never exceeds the objective at the
        start point.

    """
    initial = np.asarray(initial, dtype=float)
    window = np.broadcast_to(np.asarray(window, dtype=float), initial.shape)
    box_lower = initial - window
    box_upper = initial + window
    if lower is not None:
        box_lower = np.maximum(box_lower, lower)
    if upper is not None:
        box_upper = np.minimum(box_upper, upper)
    if np.any(box_lower > box_upper):
        msg = 'The start point {} lies outside the admissible region.'
        raise ValueError(msg.format(initial))
    start = np.clip(initial, box_lower, box_upper)

    initial_objective = fit.value(start)
    if not np.isfinite(initial_objective):
        msg = 'The objective is not finite at the start point {}.'
        raise ValueError(msg.format(start))

    if method is None:
        if cyipopt is not None:
            method = 'ipopt'
        else:
            method = 'trust-constr'
            warnings.warn('cyipopt is not installed, refining with SciPy '
                          'trust-constr instead.')

    if np.all(box_upper - box_lower == 0.0):
        return RefinementResult(start, initial_objective, initial_objective,
                                0, [initial_objective], method)

    problem = BoundedRefinement(fit, box_lower, box_upper, tol=tol)
    if method == 'ipopt':
        if cyipopt is None:
            raise ImportError('Install cyipopt to refine with ipopt.')
        x, iterations = problem.solve_ipopt(start)
    elif method == 'trust-constr':
        x, iterations = problem.solve_scipy(start)
    else:
        msg = '{} is not a valid refinement method.'
        raise ValueError(msg.format(method))

    x = np.clip(x, box_lower, box_upper)
    objective = fit.value(x)
    if not np.isfinite(objective):
        msg = 'The objective is not finite at the refined point {}.'
        raise ValueError(msg.format(x))
    if objective > initial_objective:
        msg = ('The {} refinement ended above the start point objective '
               '({} > {}), keeping the start point.')
        warnings.warn(msg.format(method, objective, initial_objective),
                      RuntimeWarning)
        x, objective = start, initial_objective

    history = [initial_objective] + list(problem.obj_value)

    return RefinementResult(x, objective, initial_objective, iterations,
                            history, method)
