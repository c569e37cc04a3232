"""Exception hierarchy shared by all camprior modules."""


class CamPriorError(Exception):
    """Base class for all camprior errors."""


class BehindCamera(CamPriorError):
    """Point has non-positive depth in the camera frame."""


class NonPositiveDepth(CamPriorError):
    """Unprojection requested at depth <= 0."""


class UnknownPreset(CamPriorError):
    """Rig preset name not recognized."""


class UnknownCamera(CamPriorError):
    """Camera name not present in the rig."""


class DegenerateSamples(CamPriorError):
    """Plane fit received collinear (or too few) sample points."""


class TooFewRows(CamPriorError):
    """Gradient map needs at least two depth rows."""


class InvalidFov(CamPriorError):
    """Field of view outside (0, 180) degrees."""


class ShapeMismatch(CamPriorError):
    """Array dimensions incompatible with the operation."""


class WeightDimMismatch(CamPriorError):
    """Projector weights incompatible with the feature tensor."""


class ScaleMismatch(CamPriorError):
    """Requested output resolution is not a uniform rescale of the camera."""


class EmptyInput(CamPriorError):
    """Operation received no usable data."""


class ColorOutOfRange(CamPriorError):
    """Color values outside [0, 1]."""


class NonPositiveScale(CamPriorError):
    """Resize scale must be > 0."""


class InvalidSpec(CamPriorError):
    """Augmentation spec violates its range/probability invariants."""


class OutOfRange(CamPriorError):
    """Detection score outside its documented domain."""
