from django.urls import path
from . import views

app_name = 'api'

urlpatterns = [
    path('health/', views.health_check, name='health_check'),
    path('beta/', views.beta_detail, name='beta_detail'),
    path('expand/', views.expand, name='expand'),
    path('count/', views.count, name='count'),
    path('dim/', views.dim, name='dim'),
    path('spectrum/', views.spectrum, name='spectrum'),
]
