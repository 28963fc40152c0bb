"""
Exceptions raised by the catmod pipeline.

Every error carries the pipeline stage it came from so the command line can
report it as ``error:<stage>:<message>``.
"""

from typing import Any, Dict, List, Optional


class CatmodError(Exception):
    """Base error for user and data problems (exit code 1)"""

    exit_code = 1
    default_stage = 'catmod'

    def __init__(self, message: str, stage: str = None, details: dict = None):
        super().__init__(message)
        self.message = message
        self.stage = stage or self.default_stage
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'stage': self.stage,
            'message': self.message,
            'details': self.details
        }


class VectorFormatError(CatmodError):
    """Malformed or unreadable word2vec text file"""

    default_stage = 'vectors'

    def __init__(self, message: str, line: Optional[int] = None, path: str = None):
        details = {}
        if line is not None:
            details['line'] = line
        if path is not None:
            details['path'] = str(path)
        super().__init__(message, details=details)
        self.line = line


class MissingWordsError(CatmodError):
    """Lexicon words without a vector under the ``fail`` policy"""

    default_stage = 'resolve'

    def __init__(self, message: str, missing: List[str] = None):
        super().__init__(message, details={'missing': list(missing or [])})
        self.missing = list(missing or [])


class LexiconFormatError(CatmodError):
    """Invalid category lexicon file or label"""

    default_stage = 'lexicon'

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message, details={'line': line} if line is not None else {})
        self.line = line


class GraphError(CatmodError):
    default_stage = 'graph'


class DegenerateInputError(CatmodError):
    """Input with no usable structure, e.g. a single effective category (Q_max = 0)"""

    default_stage = 'modularity'


class StatisticsError(CatmodError):
    default_stage = 'stats'


class TaskDataError(CatmodError):
    default_stage = 'tasks'


class ManifestError(CatmodError):
    default_stage = 'manifest'


class OutputError(CatmodError):
    """A result file or directory could not be written"""

    default_stage = 'output'

    def __init__(self, message: str, path: str = None):
        super().__init__(message, details={'path': str(path)} if path is not None else {})


class InvariantViolation(CatmodError):
    """Internal numerical identity failed (exit code 2)"""

    exit_code = 2
    default_stage = 'invariant'
