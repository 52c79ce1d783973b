"""Data objects, data frames and identifiers."""
from ..serialization import deserialize, serialize
from .frames import DataFrame, DetectionFrame, IMUDataFrame, ImageFrame, create_frame
from .objects import CameraObject, DataObject, RFDataObject, RFReceiverObject, RFTransmitterObject
from .uid import new_uid, now_us, seeded_uids

__all__ = [
    "DataObject", "CameraObject", "RFDataObject", "RFTransmitterObject", "RFReceiverObject",
    "DataFrame", "ImageFrame", "IMUDataFrame", "DetectionFrame", "create_frame",
    "new_uid", "now_us", "seeded_uids", "serialize", "deserialize",
]
