"""Exception types raised across the netwave pipeline.

Everything derives from NetwaveError so callers (and the CLI) can catch
domain failures with a single except clause while programming errors
(TypeError, etc.) still propagate.
"""


class NetwaveError(Exception):
    """Base class for all netwave domain errors."""


# ── region graph construction ────────────────────────────────────────

class DuplicateRegionId(NetwaveError):
    """The same region id appears more than once in a region-keyed input."""


class InvalidCoordinate(NetwaveError):
    """A centroid latitude/longitude is unparseable or out of range."""


class NonPositivePopulation(NetwaveError):
    """A region population is missing, unparseable, or not > 0."""


class UnknownRegionId(NetwaveError):
    """A region id referenced by an edge, event, or query does not exist."""


class NegativeWeight(NetwaveError):
    """An edge weight is negative; flux entries must be >= 0."""


# ── effective distance ───────────────────────────────────────────────

class NonPositiveProbability(NetwaveError):
    """edge_length was asked for p <= 0; a zero-flux pair has no edge."""


class EmptyArrivals(NetwaveError):
    """An arrival table required to be nonempty has no entries."""


# ── simulation ───────────────────────────────────────────────────────

class StepTooLarge(NetwaveError):
    """A compartment went below -1e-6 * N_n; the integration step cannot
    be trusted at this dt."""


# ── source inference ─────────────────────────────────────────────────

class TooFewPoints(NetwaveError):
    """A linear fit needs at least two usable (distance, time) points."""


class EmptyInput(NetwaveError):
    """window_smooth received no points."""


class NoScorableCandidate(NetwaveError):
    """No region produced enough qualifying points to be scored."""


class TooFewCommonRegions(NetwaveError):
    """Rank correlation needs at least three regions present in both
    arrival tables."""


# ── ingestion ────────────────────────────────────────────────────────

class NonMonotoneCumulative(NetwaveError):
    """A coarse series' cumulative counts decreased between bins."""
