"""
Error hierarchy for the gesture fusion pipeline.
Location: gesture_fusion_APP/exceptions.py
"""


class GestureFusionError(Exception):
    """Base class for every error raised by the pipeline"""


# Sensor data

class SensorDataError(GestureFusionError):
    """Malformed or inconsistent recording"""


class MalformedHeader(SensorDataError):
    pass


class TruncatedEvent(SensorDataError):
    pass


class CoordinateOutOfRange(SensorDataError):
    pass


class NonMonotonicTime(SensorDataError):
    pass


class RaggedRow(SensorDataError):
    pass


class MissingFile(SensorDataError):
    pass


class OverlappingAnnotations(SensorDataError):
    pass


class InvalidAnnotation(SensorDataError):
    pass


# Features

class FeatureError(GestureFusionError):
    """A window or frame cannot produce a feature"""


class EmptyWindow(FeatureError):
    pass


class EmptyFrame(FeatureError):
    pass


class PatchLargerThanFrame(FeatureError):
    pass


class WrongPatchSize(FeatureError):
    pass


class NoApsFrames(FeatureError):
    pass


class ApsFrameSizeMismatch(FeatureError):
    pass


class WindowIndexMismatch(FeatureError):
    pass


# Models

class ModelError(GestureFusionError):
    """Training or inference failure"""


class DimensionMismatch(ModelError):
    pass


class SingleClassData(ModelError):
    pass


class NonFiniteFeature(ModelError):
    pass


class InsufficientDataForFolds(ModelError):
    pass


class ShapeMismatch(ModelError):
    pass


class InvalidLabel(ModelError):
    pass


class EmptyDataset(ModelError):
    pass


class ModelModalityMismatch(ModelError):
    pass


class MissingModel(ModelError):
    pass


class ModelFormatError(ModelError):
    pass


# Configuration / CLI

class InvalidConfiguration(GestureFusionError):
    pass


class UnknownCommand(GestureFusionError):
    pass
