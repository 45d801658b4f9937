"""API URL configuration."""
from django.urls import path

from . import views

urlpatterns = [
    path('status/', views.api_status, name='api-status'),
    path('scenarios/', views.scenarios, name='api-scenarios'),
    path('point/', views.point, name='api-point'),
    path('sweeps/', views.sweeps, name='api-sweeps'),
]
