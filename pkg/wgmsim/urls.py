"""
URL configuration for wgmsim project.

Only the JSON API is routed; the simulator itself is driven through
management commands (see ``sweeps/management/commands``).
"""
from django.urls import path, include

urlpatterns = [
    path('api/v1/', include('api.urls')),
]
