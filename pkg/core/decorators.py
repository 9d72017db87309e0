"""
View decorators for the read-only API
"""
import logging
from functools import wraps

from django.core.exceptions import ValidationError
from rest_framework import status
from rest_framework.response import Response

from core.exceptions import error_message

logger = logging.getLogger(__name__)


def domain_errors(view_func):
    """
    Turn service errors into HTTP 400 responses

    The body carries the flattened message and the error code, e.g.
    {"error": "Frequency a must lie in [0,1], got 1.5", "code": "domain"}.
    """
    @wraps(view_func)
    def _wrapped_view(request, *args, **kwargs):
        try:
            return view_func(request, *args, **kwargs)
        except ValidationError as e:
            code = getattr(e, 'code', None) or 'invalid'
            logger.debug(f"{view_func.__name__}: {code}: {error_message(e)}")
            return Response({'error': error_message(e), 'code': code}, status=status.HTTP_400_BAD_REQUEST)
    return _wrapped_view
