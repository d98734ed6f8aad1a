"""Exception hierarchy shared across the package."""


class MixbnError(ValueError):
    """Base class for all input / contract errors raised by this package."""


class DatasetError(MixbnError):
    pass


class GraphError(MixbnError):
    pass


class CycleError(GraphError):
    """An operation would close a directed cycle."""


class StructureError(MixbnError):
    pass


class ParameterError(MixbnError):
    pass


class InferenceError(MixbnError):
    pass


class SimilarityError(MixbnError):
    pass


class EvaluationError(MixbnError):
    pass
