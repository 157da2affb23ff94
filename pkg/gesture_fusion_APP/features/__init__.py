from .emg_features import EmgFeatureVector, emg_feature_matrix, emg_feature_vector, mav, rms, write_feature_csv
from .vision_features import (
    EventFrame, HogDescriptor, HogParameters, Patch, accumulate_event_frame, accumulate_events,
    average_aps, extract_patch, hand_center, hog, hog_cell_histograms, locate_hand, minmax_normalize,
    subsample,
)

__all__ = [
    'EmgFeatureVector',
    'emg_feature_matrix',
    'emg_feature_vector',
    'mav',
    'rms',
    'write_feature_csv',
    'EventFrame',
    'HogDescriptor',
    'HogParameters',
    'Patch',
    'accumulate_event_frame',
    'accumulate_events',
    'average_aps',
    'extract_patch',
    'hand_center',
    'hog',
    'hog_cell_histograms',
    'locate_hand',
    'minmax_normalize',
    'subsample',
]
