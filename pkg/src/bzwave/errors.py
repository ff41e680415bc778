"""Exception hierarchy. Each class carries the CLI exit code it maps to."""

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class BZError(Exception):
    """Base class for all library errors."""

    exit_code = EXIT_DOMAIN


class NonPositiveAlpha(BZError):
    """alpha <= 0: the physical singularity of the reduction."""


class NotPositiveDefinite(BZError):
    """A metric block with non-positive determinant or trace."""


class NonPositiveScale(BZError):
    """A gauge scale c1 or c2 that is not strictly positive."""


class NonPositiveF(BZError):
    """A conformal factor f <= 0."""


class NonPositiveRadius(BZError):
    """Einstein-Rosen evaluation at r <= 0."""


class NullGradient(BZError):
    """Null alpha gradient: kappa and the density formalism are undefined."""


class ComplexPole(BZError):
    """The soliton pole mu would be complex at the evaluation point."""


class PoleCrossing(BZError):
    """An integration path meets the pole locus mu^2 = r^2."""


class OutsideDomain(BZError):
    """A point outside the region covered by the available data."""


class LambdaDegenerate(BZError):
    """|lambda + Lambda_tilde| fell below the degeneracy guard."""

    exit_code = EXIT_NUMERICAL


class CflViolation(BZError):
    """Time step larger than cfl * dx."""

    exit_code = EXIT_NUMERICAL


class QuadratureFailure(BZError):
    """A quadrature could not reach its tolerance."""

    exit_code = EXIT_NUMERICAL


class BoundaryContamination(BZError):
    """The perturbation reached the outermost grid nodes."""

    exit_code = EXIT_NUMERICAL


class GridMismatch(BZError):
    """Snapshots on different grids or with non-uniform time spacing."""

    exit_code = EXIT_USAGE


class ScenarioError(BZError):
    """Malformed or schema-invalid scenario document."""

    exit_code = EXIT_USAGE
