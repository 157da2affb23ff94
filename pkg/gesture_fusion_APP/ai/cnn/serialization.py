"""
FGCN model container.
Location: gesture_fusion_APP/ai/cnn/serialization.py

Layout:
    b'FGCN'                      magic
    uint32 LE                    format version
    uint32 LE                    descriptor length in bytes
    UTF-8 JSON descriptor        architecture plus a 'tensors' list of {name, shape}
    float64 LE blobs             one per tensor, in descriptor order, row-major
"""
import json
import logging
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

from ...exceptions import MissingModel, ModelFormatError
from .network import CnnModel

logger = logging.getLogger(__name__)

MAGIC = b'FGCN'
VERSION = 1
JSON_FORMAT = 'FGCN-json'
_HEADER = np.dtype([('version', '<u4'), ('length', '<u4')])


def pack(descriptor: Dict, tensors: Dict[str, np.ndarray]) -> bytes:
    descriptor = dict(descriptor)
    descriptor['tensors'] = [
        {'name': name, 'shape': list(np.shape(value))} for name, value in tensors.items()
    ]
    text = json.dumps(descriptor, sort_keys=True).encode('utf-8')
    header = np.array([(VERSION, len(text))], dtype=_HEADER).tobytes()
    blobs = b''.join(np.ascontiguousarray(value, dtype='<f8').tobytes() for value in tensors.values())
    return MAGIC + header + text + blobs


def unpack(data: bytes) -> Tuple[Dict, Dict[str, np.ndarray]]:
    if data[:4] != MAGIC:
        raise ModelFormatError("Not an FGCN container (bad magic)")
    if len(data) < 4 + _HEADER.itemsize:
        raise ModelFormatError("FGCN header is truncated")
    header = np.frombuffer(data, dtype=_HEADER, count=1, offset=4)[0]
    version, length = int(header['version']), int(header['length'])
    if version != VERSION:
        raise ModelFormatError(f"Unsupported FGCN version {version}")

    offset = 4 + _HEADER.itemsize
    try:
        descriptor = json.loads(data[offset:offset + length].decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ModelFormatError(f"FGCN descriptor is not valid JSON: {str(e)}")
    offset += length

    tensors = {}
    for entry in descriptor.get('tensors', []):
        shape = tuple(entry['shape'])
        count = int(np.prod(shape)) if shape else 1
        end = offset + 8 * count
        if end > len(data):
            raise ModelFormatError(f"FGCN blob for {entry['name']} is truncated")
        tensors[entry['name']] = np.frombuffer(data[offset:end], dtype='<f8').astype(np.float64).reshape(shape)
        offset = end
    if offset != len(data):
        raise ModelFormatError(f"FGCN container has {len(data) - offset} trailing bytes")
    return descriptor, tensors


def to_json_document(data: bytes) -> Dict:
    """FGCN bytes -> debugging JSON with the same content"""
    descriptor, tensors = unpack(data)
    descriptor = {key: value for key, value in descriptor.items() if key != 'tensors'}
    return {
        'format': JSON_FORMAT,
        'version': VERSION,
        'descriptor': descriptor,
        'tensors': [
            {'name': name, 'shape': list(value.shape), 'data': value.ravel().tolist()}
            for name, value in tensors.items()
        ],
    }


def from_json_document(document: Dict) -> bytes:
    """Debugging JSON -> FGCN bytes"""
    if document.get('format') != JSON_FORMAT:
        raise ModelFormatError(f"Expected a '{JSON_FORMAT}' document")
    try:
        tensors = {
            entry['name']: np.asarray(entry['data'], dtype=np.float64).reshape(entry['shape'])
            for entry in document['tensors']
        }
    except (KeyError, ValueError) as e:
        raise ModelFormatError(f"Malformed tensor entry: {str(e)}")
    return pack(document['descriptor'], tensors)


def read_bytes(path: Union[str, Path]) -> bytes:
    path = Path(path)
    if not path.is_file():
        raise MissingModel(f"Model file not found: {path}")
    return path.read_bytes()


def write_bytes(path: Union[str, Path], data: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    logger.debug(f"Wrote {len(data)} bytes to {path}")


def cnn_to_bytes(model: CnnModel, **extra) -> bytes:
    if not isinstance(model, CnnModel):
        raise ModelFormatError(f"Expected a CnnModel, got {type(model).__name__}")
    descriptor = {'type': 'cnn', 'model': model.descriptor()}
    descriptor.update(extra)
    return pack(descriptor, model.parameters())


def cnn_from_bytes(data: bytes) -> Tuple[CnnModel, Dict]:
    """Rebuild a CnnModel; returns (model, descriptor)"""
    descriptor, tensors = unpack(data)
    if descriptor.get('type') != 'cnn':
        raise ModelFormatError(f"FGCN container holds a '{descriptor.get('type')}' model, not a cnn")
    model = CnnModel.from_descriptor(descriptor['model'])
    model.set_parameters(tensors)
    return model, descriptor
