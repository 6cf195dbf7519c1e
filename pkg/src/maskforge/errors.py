"""Exception types raised across the pipeline."""


class MaskforgeError(Exception):
    """Base class for all maskforge errors."""


class ChannelMismatch(MaskforgeError):
    """Image does not have the channel count the operation requires."""


class DimensionMismatch(MaskforgeError):
    """Two pixel grids that must share dimensions do not."""


class DegenerateHistogram(MaskforgeError):
    """Thresholding is undefined because the image is constant."""


class MalformedRle(MaskforgeError):
    """Run-length counts are negative or do not sum to width*height."""


class EmptyMask(MaskforgeError):
    """A mask that must contain foreground is empty."""


class MissingImage(MaskforgeError):
    """A referenced image file cannot be read."""


class EmptyBank(MaskforgeError):
    """Scene composition was asked to draw from an empty object bank."""


class EmptyPool(MaskforgeError):
    """Random-background composition was given an empty background pool."""


class NoEligibleClass(MaskforgeError):
    """No class in the bank has enough entries to form a touching group."""


class PlacementExhausted(MaskforgeError):
    """An instance could not be placed within the attempt budget."""


class MissingDepth(MaskforgeError):
    """Relighting requires a composed depth channel that is absent."""


class IntegrityError(MaskforgeError):
    """Referential integrity of an annotation document is broken."""


class ParseError(MaskforgeError):
    """An annotation document could not be parsed."""


class NotDivisible(MaskforgeError):
    """Image dimensions are not divisible by the downscale factor."""


class CategoryMismatch(MaskforgeError):
    """Ground-truth and prediction documents disagree on categories."""


class ImageSetMismatch(MaskforgeError):
    """Ground-truth and prediction documents cover different images."""


class UnknownScene(MaskforgeError):
    """A scene id is not present in the manifest."""


class InvalidChoice(MaskforgeError):
    """A decision value is not one of hsv, rgb, saliency, reject."""


class DecisionConflict(MaskforgeError):
    """A decision write carried a stale revision."""
