"""
URL configuration for the betafreq project.
"""
from django.urls import path, include

urlpatterns = [
    path('api/', include('api.urls')),
]
