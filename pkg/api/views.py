import logging

from rest_framework import status
from rest_framework.decorators import api_view, permission_classes
from rest_framework.permissions import AllowAny
from rest_framework.response import Response

from core.config import Config
from core.decorators import domain_errors
from core.formatting import jsonable
from core.exceptions import DomainError
from services.dimension.services import DimensionService, FreqQuery
from services.expansions.services import ExpansionService
from services.language.services import LanguageService
from .serializers import (
    BetaSpecSerializer,
    CountQuerySerializer,
    DimQuerySerializer,
    ExpandQuerySerializer,
    SpectrumQuerySerializer,
)

logger = logging.getLogger(__name__)

VERSION = '1.0.0'


def invalid_query(serializer):
    return Response({'error': serializer.errors, 'code': 'invalid_query'}, status=status.HTTP_400_BAD_REQUEST)


def check_counting_length(data, config):
    if data['method'] == 'counting' and data['n'] > config.n_max:
        raise DomainError(f"n={data['n']} exceeds the configured maximum")


def system_payload(system):
    return {
        'beta': system.beta,
        'label': system.label,
        'kind': system.kind,
        'order': system.order,
        'finite_length': system.finite_length,
        'eps_one': str(system.eps_one[:32]),
        'certified': system.certified,
    }


def result_payload(a, result):
    return {
        'a': a,
        'dim': result.dim,
        'method': result.method.value,
        'argmax': list(result.argmax),
        'kkt_residual': result.kkt_residual,
        'flag': result.flag,
        'certified': result.certified,
        'diagnostics': result.diagnostics,
    }


@api_view(['GET'])
@permission_classes([AllowAny])
def health_check(request):
    """API health check endpoint"""
    return Response({
        'status': 'healthy',
        'version': VERSION,
        'message': 'betafreq API is running'
    })


@api_view(['GET'])
@permission_classes([AllowAny])
@domain_errors
def beta_detail(request):
    """The beta system selected by the query"""
    serializer = BetaSpecSerializer(data=request.query_params)
    if not serializer.is_valid():
        return invalid_query(serializer)
    return Response(jsonable(system_payload(serializer.system())))


@api_view(['GET'])
@permission_classes([AllowAny])
@domain_errors
def expand(request):
    """Greedy digits of x with the round-trip residual"""
    serializer = ExpandQuerySerializer(data=request.query_params)
    if not serializer.is_valid():
        return invalid_query(serializer)
    data = serializer.validated_data
    if data['digits'] > Config.from_settings().n_max:
        raise DomainError(f"digits={data['digits']} exceeds the configured maximum")

    system = serializer.system()
    word = ExpansionService.greedy_expand(data['x'], system, data['digits'])
    return Response(jsonable({
        'beta': system.beta,
        'x': data['x'],
        'digits': str(word),
        'residual': ExpansionService.expansion_residual(data['x'], word, system),
        'legal': ExpansionService.is_legal_word(word, system),
    }))


@api_view(['GET'])
@permission_classes([AllowAny])
@domain_errors
def count(request):
    """Exact N(n), or N(n,k) when zeros is given; counts are returned as strings"""
    serializer = CountQuerySerializer(data=request.query_params)
    if not serializer.is_valid():
        return invalid_query(serializer)
    data = serializer.validated_data
    if data['n'] > Config.from_settings().n_max:
        raise DomainError(f"n={data['n']} exceeds the configured maximum")

    graph = LanguageService.build_follower_graph(serializer.system())
    if data.get('zeros') is not None:
        value = LanguageService.count_words_by_zeros(graph, data['n'])[data['zeros']]
        return Response({'n': data['n'], 'zeros': data['zeros'], 'count': str(value)})
    return Response({'n': data['n'], 'count': str(LanguageService.count_words(graph, data['n']))})


@api_view(['GET'])
@permission_classes([AllowAny])
@domain_errors
def dim(request):
    """Dimension of F_a"""
    serializer = DimQuerySerializer(data=request.query_params)
    if not serializer.is_valid():
        return invalid_query(serializer)
    data = serializer.validated_data
    config = Config.from_settings()
    check_counting_length(data, config)
    result = DimensionService.solve(
        FreqQuery(serializer.system(), data['a']), data['method'], config.tol, data['n'], allow_uncertified=True
    )
    return Response(jsonable(result_payload(data['a'], result)))


@api_view(['GET'])
@permission_classes([AllowAny])
@domain_errors
def spectrum(request):
    """Dimension over a frequency grid; failing rows carry their error"""
    serializer = SpectrumQuerySerializer(data=request.query_params)
    if not serializer.is_valid():
        return invalid_query(serializer)
    data = serializer.validated_data
    config = Config.from_settings()
    check_counting_length(data, config)
    system = serializer.system()
    result = DimensionService.spectrum(
        system, data['a_grid'], workers=config.workers, tol=config.tol, allow_uncertified=True,
        method=data['method'], counting_length=data['n'],
    )
    rows = [
        result_payload(row.a, row.result) if row.result is not None else {'a': row.a, 'flag': row.flag}
        for row in result.rows
    ]
    return Response(jsonable({'beta': system_payload(system), 'rows': rows, 'continuity': result.continuity}))
