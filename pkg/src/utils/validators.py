"""Input validation utilities."""

from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Type, TypeVar

from pydantic import BaseModel, ValidationError

from config.constants import INPUT_LIMITS
from utils.errors import InputFileError
from utils.logger import get_enhanced_logger

logger = get_enhanced_logger(__name__)

ModelT = TypeVar('ModelT', bound=BaseModel)

ALLOWED_EXTENSIONS = ('json',)


class FileValidator:
    """Checks descriptor files before they are parsed."""

    def __init__(self, max_file_size: int = INPUT_LIMITS['max_file_size']):
        self.max_file_size = max_file_size

    def validate_file(self, path) -> Tuple[bool, Optional[str], Optional[Dict[str, Any]]]:
        """
        Validate a descriptor file on disk.

        Returns:
            Tuple of (is_valid, error_message, file_info)
        """
        path = Path(path)
        is_valid_name, name_error = self._validate_filename(path.name)
        if not is_valid_name:
            return False, name_error, None

        if not path.is_file():
            return False, f"File not found: {path}", None

        size = path.stat().st_size
        if size > self.max_file_size:
            return False, f"File too large. Maximum size: {self.max_file_size / (1024 * 1024):.1f}MB", None
        if size == 0:
            return False, "File is empty", None

        extension = path.suffix.lower().lstrip('.')
        if extension not in ALLOWED_EXTENSIONS:
            return False, f"File type '{extension}' not supported", None

        return True, None, {'filename': path.name, 'size': size, 'extension': extension}

    def _validate_filename(self, filename: str) -> Tuple[bool, Optional[str]]:
        if not filename:
            return False, "Filename is required"
        if '\x00' in filename:
            return False, "Invalid filename: null bytes detected"
        return True, None


def load_model(path, model: Type[ModelT], validator: Optional[FileValidator] = None) -> ModelT:
    """Validate, read and parse a JSON descriptor into ``model``; raises InputFileError."""
    validator = validator or FileValidator()
    ok, error, info = validator.validate_file(path)
    if not ok:
        raise InputFileError(error, {'path': str(path)})
    try:
        text = Path(path).read_text(encoding='utf-8')
    except UnicodeDecodeError as e:
        raise InputFileError("File is not valid UTF-8", {'path': str(path), 'reason': str(e)}) from e
    try:
        parsed = model.model_validate_json(text)
    except ValidationError as e:
        raise InputFileError(f"Invalid {model.__name__} file", {
            'path': str(path),
            'errors': [{'loc': [str(x) for x in err['loc']], 'msg': err['msg']} for err in e.errors()],
        }) from e
    logger.debug("Loaded descriptor", path=str(path), model=model.__name__, size=info['size'])
    return parsed
